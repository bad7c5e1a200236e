#pragma once

#include <string>

#include "chtwin/env.hpp"

namespace chtwin {

// Anything that can answer "what is the channel gain in dB between tx and rx":
// the ground-truth oracle, the learned twin, an SI backend or the PL baseline.
class GainPredictor {
 public:
  virtual ~GainPredictor() = default;
  virtual double gain(Position tx, Position rx) const = 0;
  virtual std::string tag() const = 0;
};

}  // namespace chtwin
