#pragma once

#include <span>
#include <string>
#include <vector>

#include "chtwin/env.hpp"
#include "chtwin/predictor.hpp"

namespace chtwin {

inline constexpr std::size_t kDefaultAssociationK = 5;

enum class Criterion { gain, distance };

struct ApSelection {
  std::size_t ap_index = 0;
  double score = 0.0;  // predicted gain in dB, or distance in meters
};

struct AssociationResult {
  Position ue;
  std::vector<ApSelection> selected;  // best first
  Criterion criterion = Criterion::gain;

  std::vector<std::size_t> indices() const;
};

// Top-k by descending score; ties go to the lower index.
std::vector<ApSelection> top_k_highest(std::span<const double> scores, std::size_t k);
// Top-k by ascending score; ties go to the lower index.
std::vector<ApSelection> top_k_lowest(std::span<const double> scores, std::size_t k);

// Scores every AP by predictor.gain(ap, ue) and keeps the k strongest.
AssociationResult associate_by_gain(const Environment& env, const GainPredictor& predictor,
                                    Position ue, std::size_t k = kDefaultAssociationK);

// The k nearest APs.
AssociationResult associate_by_distance(const Environment& env, Position ue,
                                        std::size_t k = kDefaultAssociationK);

inline constexpr char kAssociationCsvHeader[] = "rank,ap_index,score_db";
std::string association_to_csv(const AssociationResult& result);

}  // namespace chtwin
