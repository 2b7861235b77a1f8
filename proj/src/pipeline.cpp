// pipeline.cpp

#include "lrc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "lrc/digest.hpp"
#include "lrc/parallel.hpp"
#include "lrc/sieve.hpp"
#include "lrc/witness.hpp"

namespace lrc {

namespace fs = std::filesystem;

namespace {

// Depth-first walk over the c^k preimages of one source tuple.
class FiberSearch {
 public:
  FiberSearch(const WitnessTable& table, Residue source_modulus, Residue c)
      : table_(table),
        k_(static_cast<std::size_t>(table.params().k())),
        words_(table.words()),
        source_modulus_(source_modulus),
        c_(c),
        coords_(k_),
        levels_((k_ + 1) * words_) {}

  void run(std::span<const Residue> source, std::vector<Residue>& out) {
    source_ = source;
    out_ = &out;
    std::fill_n(levels_.begin(), words_, ~Word{0});
    descend(0, true);
  }

 private:
  bool apply(std::size_t depth, Residue v) {
    const auto row = table_.row(v, scratch_);
    const Word* src = levels_.data() + depth * words_;
    Word* dst = levels_.data() + (depth + 1) * words_;
    Word any = 0;
    for (std::size_t w = 0; w < words_; ++w) any |= (dst[w] = src[w] & row[w]);
    return any != 0;
  }

  void descend(std::size_t depth, bool alive) {
    if (depth == k_) {
      if (!alive && !gcd_condition(coords_, table_.params().l())) {
        out_->insert(out_->end(), coords_.begin(), coords_.end());
      }
      return;
    }
    for (Residue j = 0; j < c_; ++j) {
      const Residue v = source_[depth] + j * source_modulus_;
      coords_[depth] = v;
      descend(depth + 1, alive && apply(depth, v));
    }
  }

  const WitnessTable& table_;
  std::size_t k_;
  std::size_t words_;
  Residue source_modulus_;
  Residue c_;
  std::span<const Residue> source_;
  std::vector<Residue>* out_ = nullptr;
  std::vector<Residue> coords_;
  std::vector<Word> levels_;
  std::vector<Word> scratch_;
};

constexpr std::size_t kLiftChunk = 16;
constexpr std::size_t kProjectChunk = 4096;

std::vector<Residue> concat(std::vector<std::vector<Residue>>& parts) {
  std::size_t total = 0;
  for (const auto& part : parts) total += part.size();
  std::vector<Residue> flat;
  flat.reserve(total);
  for (auto& part : parts) {
    flat.insert(flat.end(), part.begin(), part.end());
    std::vector<Residue>().swap(part);
  }
  return flat;
}

}  // namespace

TupleSet lift(const TupleSet& s, Residue c, unsigned threads) {
  const AnsatzParams target = s.params().lifted(c);
  TupleSet out(target, "x" + std::to_string(c) + "(" + s.label() + ")");
  if (s.empty()) return out;
  const WitnessTable table(target);
  std::vector<std::vector<Residue>> parts(chunk_count(s.size(), kLiftChunk));
  parallel_chunks(s.size(), kLiftChunk, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    FiberSearch search(table, s.params().modulus(), c);
    for (std::size_t i = begin; i < end; ++i) search.run(s[i], parts[chunk]);
  });
  auto flat = concat(parts);
  sort_unique_tuples(flat, static_cast<std::size_t>(s.k()));
  return TupleSet::from_flat(target, out.label(), std::move(flat));
}

TupleSet project(const TupleSet& s, unsigned threads) {
  const AnsatzParams target = s.params().base();
  const Residue p = target.p();
  const std::string label = "/" + std::to_string(s.params().l()) + "(" + s.label() + ")";
  std::vector<std::vector<Residue>> parts(chunk_count(s.size(), kProjectChunk));
  parallel_chunks(s.size(), kProjectChunk, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<Residue> reduced(static_cast<std::size_t>(s.k()));
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = s[i];
      for (std::size_t j = 0; j < row.size(); ++j) reduced[j] = row[j] % p;
      const auto canon = canonicalize(reduced, p);
      parts[chunk].insert(parts[chunk].end(), canon.coords.begin(), canon.coords.end());
    }
  });
  return TupleSet::from_flat(target, label, concat(parts));
}

std::vector<Residue> canonical_one_to_k(int k, Residue p) {
  if (static_cast<Wide>(k) >= p) {
    throw Error(ErrorCode::InvalidParams, "(1..k) has a zero coordinate mod " + std::to_string(p));
  }
  std::vector<Residue> t(static_cast<std::size_t>(k));
  std::iota(t.begin(), t.end(), Residue{1});
  return canonicalize(t, p).coords;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Empty: return "Empty";
    case Outcome::OnlyOneToK: return "OnlyOneToK";
    case Outcome::Survivors: return "Survivors";
  }
  return "Survivors";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "Empty") return Outcome::Empty;
  if (s == "OnlyOneToK") return Outcome::OnlyOneToK;
  if (s == "Survivors") return Outcome::Survivors;
  throw Error(ErrorCode::Corrupt, "unknown outcome '" + s + "'");
}

Outcome classify_final(const TupleSet& final_set, const LiftingDiagram& d) {
  if (final_set.empty()) return Outcome::Empty;
  if (d.termination != Termination::EmptyOrOneToK) return Outcome::Survivors;
  const int k = final_set.k();
  const Residue p = final_set.params().p();
  if (static_cast<Wide>(k) >= p) return Outcome::Survivors;
  const TupleSet classes = final_set.params().l() == 1 ? final_set : project(final_set);
  if (classes.size() == 1 && std::ranges::equal(classes[0], canonical_one_to_k(k, p))) return Outcome::OnlyOneToK;
  return Outcome::Survivors;
}

// --- manifest ---------------------------------------------------------------

std::string Manifest::serialize() const {
  nlohmann::ordered_json j;
  j["format"] = "lrc-run-manifest/1";
  j["digest_algorithm"] = std::string(kDigestAlgorithm);
  j["k"] = k;
  j["p"] = p;
  j["diagram"] = diagram;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json e;
    e["index"] = s.index;
    e["label"] = s.label;
    e["step"] = s.step;
    e["file"] = s.file;
    e["l"] = s.level;
    e["input_count"] = s.input_count;
    e["count"] = s.output_count;
    e["digest"] = s.digest;
    e["wall_seconds"] = s.wall_seconds;
    e["workers"] = s.workers;
    j["stages"].push_back(std::move(e));
  }
  j["complete"] = complete;
  j["outcome"] = outcome ? nlohmann::ordered_json(to_string(*outcome)) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

Manifest Manifest::parse(const std::string& text) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("digest_algorithm").get<std::string>() != kDigestAlgorithm) {
      throw Error(ErrorCode::Corrupt, "manifest uses unsupported digest algorithm");
    }
    m.k = j.at("k").get<int>();
    m.p = j.at("p").get<Residue>();
    m.diagram = j.at("diagram").get<std::string>();
    for (const auto& e : j.at("stages")) {
      StageReport s;
      s.index = e.at("index").get<std::size_t>();
      s.label = e.at("label").get<std::string>();
      s.step = e.at("step").get<std::string>();
      s.file = e.at("file").get<std::string>();
      s.level = e.at("l").get<Residue>();
      s.input_count = e.at("input_count").get<std::size_t>();
      s.output_count = e.at("count").get<std::size_t>();
      s.digest = e.at("digest").get<std::string>();
      s.wall_seconds = e.at("wall_seconds").get<double>();
      s.workers = e.at("workers").get<unsigned>();
      m.stages.push_back(std::move(s));
    }
    m.complete = j.at("complete").get<bool>();
    if (!j.at("outcome").is_null()) m.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest Manifest::load(const fs::path& path) { return parse(read_file(path)); }

void Manifest::save(const fs::path& path) const { write_file_atomic(path, serialize()); }

std::optional<std::string> verify_stage_digests(const fs::path& run_dir, const Manifest& m) {
  for (const auto& s : m.stages) {
    const fs::path file = run_dir / s.file;
    if (!fs::exists(file) || sha256_file(file) != s.digest) return s.label;
  }
  return std::nullopt;
}

// --- diagram execution ------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void log_stage(RunLog* log, int k, Residue p, const StageReport& r) {
  if (!log) return;
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.6f", r.wall_seconds);
  log->event(LogLevel::Info, r.label, "stage_complete",
             {{"k", std::to_string(k)},
              {"p", std::to_string(p)},
              {"index", std::to_string(r.index)},
              {"step", r.step},
              {"l", std::to_string(r.level)},
              {"in", std::to_string(r.input_count)},
              {"out", std::to_string(r.output_count)},
              {"wall_s", wall},
              {"workers", std::to_string(r.workers)},
              {"digest", r.digest},
              {"file", r.file}});
}

StageReport publish(const fs::path& run_dir, const TupleSet& set, std::size_t index, std::string step,
                    std::size_t input_count, double wall, unsigned workers) {
  StageReport r;
  r.index = index;
  r.step = std::move(step);
  r.label = set.label();
  r.level = set.params().l();
  r.input_count = input_count;
  r.output_count = set.size();
  r.wall_seconds = std::round(wall * 1e6) / 1e6;  // microseconds, as logged
  r.workers = workers;
  r.file = "S" + std::to_string(index) + ".txt";
  const std::string text = set.serialize();
  r.digest = sha256_hex(text);
  write_file_atomic(run_dir / r.file, text);
  return r;
}

}  // namespace

DiagramOutcome run_diagram(int k, Residue p, const LiftingDiagram& d, const fs::path& run_dir,
                           const RunOptions& options) {
  validate_diagram(d, k);
  const unsigned workers = std::max(options.threads, 1u);
  const std::string spec = render(d);
  fs::create_directories(run_dir);
  const fs::path manifest_path = run_dir / kManifestName;

  Manifest m;
  std::optional<TupleSet> current;
  if (fs::exists(manifest_path)) {
    if (!options.resume) {
      throw Error(ErrorCode::Usage, run_dir.string() + " already holds a run; pass --resume to continue it");
    }
    m = Manifest::load(manifest_path);
    if (m.k != k || m.p != p || m.diagram != spec) {
      throw Error(ErrorCode::Usage, "resume mismatch: run directory holds k=" + std::to_string(m.k) +
                                        " p=" + std::to_string(m.p) + " diagram " + m.diagram);
    }
    if (auto bad = verify_stage_digests(run_dir, m)) {
      throw Error(ErrorCode::Corrupt, "checkpoint corruption: stage " + *bad + " in " + run_dir.string() +
                                          " does not match its recorded digest");
    }
    if (!m.stages.empty()) {
      current = TupleSet::load(run_dir / m.stages.back().file);
      if (current->size() != m.stages.back().output_count) {
        throw Error(ErrorCode::Corrupt, "stage " + m.stages.back().label + " count differs from manifest");
      }
    }
    if (options.log) {
      options.log->event(LogLevel::Info, "run", "resume",
                         {{"k", std::to_string(k)}, {"p", std::to_string(p)},
                          {"stages", std::to_string(m.stages.size())}});
    }
  } else {
    m.k = k;
    m.p = p;
    m.diagram = spec;
  }

  if (!current) {
    const auto start = Clock::now();
    TupleSet s1 = sieve_initial(k, p, SieveOptions{workers, true});
    m.stages.push_back(publish(run_dir, s1, 1, "sieve", 0, seconds_since(start), workers));
    m.save(manifest_path);
    log_stage(options.log, k, p, m.stages.back());
    current = std::move(s1);
  }

  const std::size_t done = m.stages.size() - 1;
  for (std::size_t i = done; i < d.steps.size(); ++i) {
    if (options.stop_after_steps && i >= *options.stop_after_steps) break;
    const Step& step = d.steps[i];
    const std::size_t index = i + 2;
    const std::string prev_label = "S" + std::to_string(index - 1);
    const auto start = Clock::now();
    TupleSet next = step.kind == Step::Kind::Lift ? lift(*current, step.factor, workers) : [&] {
      if (step.factor != current->params().l()) {
        throw Error(ErrorCode::InvalidParams, "projection /" + std::to_string(step.factor) +
                                                  " does not match level l = " +
                                                  std::to_string(current->params().l()));
      }
      return project(*current, workers);
    }();
    next.set_label("S" + std::to_string(index) + "=" + describe(step) + "(" + prev_label + ")");
    m.stages.push_back(publish(run_dir, next, index, describe(step), current->size(), seconds_since(start), workers));
    m.save(manifest_path);
    log_stage(options.log, k, p, m.stages.back());
    current = std::move(next);
  }

  DiagramOutcome result{.final_set = std::move(*current), .stages = {}, .manifest_path = manifest_path};
  result.complete = m.stages.size() == d.steps.size() + 1;
  if (result.complete) {
    result.outcome = classify_final(result.final_set, d);
    if (!m.complete) {
      m.complete = true;
      m.outcome = result.outcome;
      m.save(manifest_path);
      if (options.log) {
        options.log->event(LogLevel::Info, "run", "run_complete",
                           {{"k", std::to_string(k)}, {"p", std::to_string(p)}, {"diagram", spec},
                            {"outcome", to_string(result.outcome)},
                            {"final_count", std::to_string(result.final_set.size())}});
      }
    }
  }
  result.stages = m.stages;
  return result;
}

std::vector<StageReport> replay_stage_reports(const fs::path& log_path, int k, Residue p) {
  std::vector<StageReport> out;
  for (const auto& rec : read_log(log_path)) {
    const auto& f = rec.fields;
    auto get = [&](const char* key) -> const std::string& {
      static const std::string empty;
      auto it = f.find(key);
      return it == f.end() ? empty : it->second;
    };
    if (get("event") != "stage_complete" || get("k") != std::to_string(k) || get("p") != std::to_string(p)) continue;
    StageReport r;
    r.index = std::stoul(get("index"));
    r.step = get("step");
    r.label = get("stage");
    r.level = static_cast<Residue>(std::stoul(get("l")));
    r.input_count = std::stoul(get("in"));
    r.output_count = std::stoul(get("out"));
    r.wall_seconds = std::stod(get("wall_s"));
    r.workers = static_cast<unsigned>(std::stoul(get("workers")));
    r.digest = get("digest");
    r.file = get("file");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lrc
