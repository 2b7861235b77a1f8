// tuple_set.cpp

#include "lrc/tuple_set.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lrc {

TupleSet::TupleSet(AnsatzParams params, std::string label) : params_(params), label_(std::move(label)) {}

void sort_unique_tuples(std::vector<Residue>& flat, std::size_t k) {
  const std::size_t n = flat.size() / k;
  if (n < 2) return;
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  auto row = [&](std::uint32_t i) { return flat.begin() + static_cast<std::ptrdiff_t>(i * k); };
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(row(a), row(a) + k, row(b), row(b) + k);
  });
  std::vector<Residue> out;
  out.reserve(flat.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0 && std::equal(row(idx[j]), row(idx[j]) + k, row(idx[j - 1]))) continue;
    out.insert(out.end(), row(idx[j]), row(idx[j]) + k);
  }
  flat.swap(out);
}

TupleSet TupleSet::from_flat(AnsatzParams params, std::string label, std::vector<Residue> flat) {
  const std::size_t k = static_cast<std::size_t>(params.k());
  if (flat.size() % k != 0) throw Error(ErrorCode::InvalidParams, "flat tuple data is not a multiple of k");
  for (std::size_t i = 0; i < flat.size(); i += k) {
    validate_tuple(std::span<const Residue>(flat).subspan(i, k), params);
  }
  sort_unique_tuples(flat, k);
  TupleSet out(params, std::move(label));
  out.flat_ = std::move(flat);
  return out;
}

bool TupleSet::contains(std::span<const Residue> tuple) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto row = (*this)[mid];
    if (std::lexicographical_compare(row.begin(), row.end(), tuple.begin(), tuple.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo < size() && std::ranges::equal((*this)[lo], tuple);
}

std::string TupleSet::serialize() const {
  std::string out = "# lrc k=" + std::to_string(params_.k()) + " p=" + std::to_string(params_.p()) +
                    " l=" + std::to_string(params_.l()) + " stage=" + label_ + " count=" +
                    std::to_string(size()) + "\n";
  out.reserve(out.size() + flat_.size() * 6);
  const std::size_t k = static_cast<std::size_t>(params_.k());
  char buf[16];
  for (std::size_t i = 0; i < flat_.size(); ++i) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, flat_[i]);
    out.append(buf, end);
    out.push_back((i + 1) % k == 0 ? '\n' : ',');
  }
  return out;
}

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::Corrupt, "tuple set: " + what); }

std::uint64_t header_field(const std::string& header, const std::string& key) {
  const std::string needle = " " + key + "=";
  const auto pos = header.find(needle);
  if (pos == std::string::npos) corrupt("header lacks " + key);
  std::uint64_t value = 0;
  const char* first = header.data() + pos + needle.size();
  auto [ptr, ec] = std::from_chars(first, header.data() + header.size(), value);
  if (ec != std::errc() || ptr == first) corrupt("bad value for " + key);
  return value;
}

}  // namespace

TupleSet TupleSet::parse(const std::string& text) {
  const auto eol = text.find('\n');
  if (eol == std::string::npos) corrupt("missing header line");
  const std::string header = text.substr(0, eol);
  if (header.rfind("# lrc ", 0) != 0) corrupt("header must start with '# lrc '");
  const auto k = header_field(header, "k");
  const auto p = header_field(header, "p");
  const auto l = header_field(header, "l");
  const auto count = header_field(header, "count");
  const auto stage_pos = header.find(" stage=");
  const auto count_pos = header.rfind(" count=");
  if (stage_pos == std::string::npos || count_pos < stage_pos) corrupt("header lacks stage label");
  std::string label = header.substr(stage_pos + 7, count_pos - stage_pos - 7);

  if (k > 1024 || p > kMaxModulus || l > kMaxModulus) corrupt("header parameters out of range");
  AnsatzParams params(static_cast<int>(k), static_cast<Residue>(p), static_cast<Residue>(l));
  TupleSet out(params, std::move(label));
  out.flat_.reserve(count * k);

  const char* cur = text.data() + eol + 1;
  const char* end = text.data() + text.size();
  std::size_t lines = 0;
  while (cur < end) {
    for (std::size_t j = 0; j < k; ++j) {
      Residue v = 0;
      auto [ptr, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc() || ptr == cur) corrupt("bad coordinate on data line " + std::to_string(lines + 1));
      out.flat_.push_back(v);
      const char want = j + 1 == k ? '\n' : ',';
      if (ptr == end || *ptr != want) corrupt("bad separator on data line " + std::to_string(lines + 1));
      cur = ptr + 1;
    }
    const auto row = out[lines];
    validate_tuple(row, params);
    if (lines > 0) {
      const auto prev = out[lines - 1];
      if (!std::lexicographical_compare(prev.begin(), prev.end(), row.begin(), row.end())) {
        corrupt("data lines not strictly ascending at line " + std::to_string(lines + 1));
      }
    }
    ++lines;
  }
  if (lines != count) corrupt("header count " + std::to_string(count) + " but " + std::to_string(lines) + " lines");
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void TupleSet::save_atomic(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

TupleSet TupleSet::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace lrc
