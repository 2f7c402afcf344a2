#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/ml/dataset.hpp"

namespace fundusq::ml {

enum class SplitMode { kSubject, kImage };

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

namespace detail {

/// Picks round(total * fraction) items, spreading them over strata in
/// proportion to stratum size (largest remainder, earlier strata win ties).
/// Within each stratum the chosen items are a seeded shuffle prefix.
inline SplitIndices stratified_pick(const std::vector<std::vector<std::size_t>>& strata,
                                    double test_fraction, std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& s : strata) total += s.size();
  const auto want = static_cast<std::size_t>(std::llround(static_cast<double>(total) * test_fraction));
  if (want == 0 || want >= total)
    throw InvalidArgument("split: test fraction leaves an empty train or test side");

  std::vector<std::size_t> quota(strata.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t given = 0;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    const double ideal = static_cast<double>(strata[k].size()) * static_cast<double>(want) /
                         static_cast<double>(total);
    quota[k] = static_cast<std::size_t>(std::floor(ideal));
    given += quota[k];
    remainders.emplace_back(ideal - std::floor(ideal), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < want; ++i, ++given) ++quota[remainders[i].second];

  std::mt19937_64 rng(seed);
  SplitIndices out;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    std::vector<std::size_t> items = strata[k];
    std::shuffle(items.begin(), items.end(), rng);
    out.test.insert(out.test.end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(quota[k]));
    out.train.insert(out.train.end(), items.begin() + static_cast<std::ptrdiff_t>(quota[k]), items.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace detail

/// Stratified random split. kImage stratifies rows by label; kSubject keeps
/// all rows of a subject together and stratifies subjects by the set of
/// labels they carry. test_fraction applies to rows or subjects respectively.
inline SplitIndices split_dataset(const FeatureMatrix& data, double test_fraction,
                                  std::uint64_t seed, SplitMode mode = SplitMode::kSubject) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("split: test fraction must lie in (0, 1)");
  const std::size_t n = data.rows();
  if (n < 4) throw InvalidArgument("split: need at least 4 rows");

  if (mode == SplitMode::kImage) {
    std::vector<std::vector<std::size_t>> strata(2);
    for (std::size_t i = 0; i < n; ++i) strata[static_cast<std::size_t>(data.labels[i])].push_back(i);
    return detail::stratified_pick(strata, test_fraction, seed);
  }

  if (data.subjects.size() != n) throw InvalidArgument("split: subject ids required");
  std::map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < n; ++i) rows_of[data.subjects[i]].push_back(i);
  std::vector<std::string> subjects;
  std::map<std::string, std::vector<std::size_t>> by_signature;
  for (const auto& [subject, rows] : rows_of) {
    std::string sig;
    for (std::size_t r : rows) sig += static_cast<char>('0' + data.labels[r]);
    std::sort(sig.begin(), sig.end());
    sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
    by_signature[sig].push_back(subjects.size());
    subjects.push_back(subject);
  }
  std::vector<std::vector<std::size_t>> strata;
  for (auto& [sig, members] : by_signature) strata.push_back(members);
  const SplitIndices picked = detail::stratified_pick(strata, test_fraction, seed);

  SplitIndices out;
  for (std::size_t s : picked.train)
    for (std::size_t r : rows_of[subjects[s]]) out.train.push_back(r);
  for (std::size_t s : picked.test)
    for (std::size_t r : rows_of[subjects[s]]) out.test.push_back(r);
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Seeded stratified assignment of rows to k folds; returns the fold of each row.
inline std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t k,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(labels.size());
  std::size_t next = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) fold[i] = next++ % k;
  }
  return fold;
}

}  // namespace fundusq::ml
