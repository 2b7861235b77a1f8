// tuple_set.hpp
// Sorted, deduplicated sets of speed tuples with their ansatz and stage label,
// and the text file format used for every pipeline stage:
//
//   # lrc k=<k> p=<p> l=<l> stage=<label> count=<n>
//   <c1>,<c2>,...,<ck>
//   ...
//
// Lines are sorted ascending by the integer vectors; LF endings; trailing LF.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lrc/core.hpp"

namespace lrc {

class TupleSet {
 public:
  explicit TupleSet(AnsatzParams params, std::string label = "");

  /// Sorts and deduplicates flat (row-major, stride k) coordinates. Validates
  /// every tuple against params.
  static TupleSet from_flat(AnsatzParams params, std::string label, std::vector<Residue> flat);

  const AnsatzParams& params() const noexcept { return params_; }
  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  int k() const noexcept { return params_.k(); }
  std::size_t size() const noexcept { return flat_.size() / static_cast<std::size_t>(params_.k()); }
  bool empty() const noexcept { return flat_.empty(); }

  std::span<const Residue> operator[](std::size_t i) const {
    const std::size_t k = static_cast<std::size_t>(params_.k());
    return std::span<const Residue>(flat_).subspan(i * k, k);
  }
  const std::vector<Residue>& flat() const noexcept { return flat_; }
  bool contains(std::span<const Residue> tuple) const;

  std::string serialize() const;
  static TupleSet parse(const std::string& text);

  /// Write to a temporary sibling then rename into place.
  void save_atomic(const std::filesystem::path& path) const;
  static TupleSet load(const std::filesystem::path& path);

  /// Same parameters and same tuples (labels ignored).
  bool same_tuples(const TupleSet& other) const {
    return params_ == other.params_ && flat_ == other.flat_;
  }

 private:
  AnsatzParams params_;
  std::string label_;
  std::vector<Residue> flat_;
};

/// Sorts and deduplicates stride-k tuples in place.
void sort_unique_tuples(std::vector<Residue>& flat, std::size_t k);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace lrc
