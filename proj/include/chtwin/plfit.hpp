#pragma once

#include <filesystem>
#include <string>

#include "chtwin/predictor.hpp"
#include "chtwin/sampling.hpp"

namespace chtwin {

// Log-distance baseline: gain(d) = -(a_db + b_db_per_decade * log10(max(d, d_min))).
struct PlModel {
  double a_db = 0.0;
  double b_db_per_decade = 0.0;
  double d_min = 1.0;

  void validate() const;
};

// Ordinary least squares of path loss on log10 distance via the 2x2 normal
// equations. d_min must match the oracle's distance floor.
PlModel fit_pl(const Dataset& ds, double d_min = 1.0);

double pl_predict(const PlModel& model, Position tx, Position rx);

// One line: "a_db b_db_per_decade d_min".
std::string pl_to_text(const PlModel& model);
PlModel pl_from_text(const std::string& text);
void save_pl(const PlModel& model, const std::filesystem::path& path);
PlModel load_pl(const std::filesystem::path& path);

class PlPredictor final : public GainPredictor {
 public:
  explicit PlPredictor(PlModel model) : model_(model) { model_.validate(); }
  double gain(Position tx, Position rx) const override { return pl_predict(model_, tx, rx); }
  std::string tag() const override { return "pl"; }
  const PlModel& model() const { return model_; }

 private:
  PlModel model_;
};

}  // namespace chtwin
