#include "chtwin/assoc.hpp"

#include <algorithm>
#include <numeric>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"

namespace chtwin {

std::vector<std::size_t> AssociationResult::indices() const {
  std::vector<std::size_t> out;
  out.reserve(selected.size());
  for (const auto& s : selected) out.push_back(s.ap_index);
  return out;
}

namespace {

template <class Better>
std::vector<ApSelection> top_k(std::span<const double> scores, std::size_t k, Better better) {
  if (k < 1 || k > scores.size()) {
    throw PreconditionError("k=" + std::to_string(k) + " outside [1, " +
                            std::to_string(scores.size()) + "]");
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return better(scores[a], scores[b]);
                      return a < b;
                    });
  std::vector<ApSelection> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({idx[i], scores[idx[i]]});
  return out;
}

}  // namespace

std::vector<ApSelection> top_k_highest(std::span<const double> scores, std::size_t k) {
  return top_k(scores, k, [](double a, double b) { return a > b; });
}

std::vector<ApSelection> top_k_lowest(std::span<const double> scores, std::size_t k) {
  return top_k(scores, k, [](double a, double b) { return a < b; });
}

AssociationResult associate_by_gain(const Environment& env, const GainPredictor& predictor,
                                    Position ue, std::size_t k) {
  std::vector<double> scores;
  scores.reserve(env.aps.size());
  for (const auto& ap : env.aps) scores.push_back(predictor.gain(ap, ue));
  return {ue, top_k_highest(scores, k), Criterion::gain};
}

AssociationResult associate_by_distance(const Environment& env, Position ue, std::size_t k) {
  std::vector<double> scores;
  scores.reserve(env.aps.size());
  for (const auto& ap : env.aps) scores.push_back(distance(ap, ue));
  return {ue, top_k_lowest(scores, k), Criterion::distance};
}

std::string association_to_csv(const AssociationResult& result) {
  std::string out = kAssociationCsvHeader;
  out += '\n';
  for (std::size_t r = 0; r < result.selected.size(); ++r) {
    out += std::to_string(r + 1) + ',' + std::to_string(result.selected[r].ap_index) + ',' +
           format_double(result.selected[r].score) + '\n';
  }
  return out;
}

}  // namespace chtwin
