#include "chtwin/plfit.hpp"

#include <cmath>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"

namespace chtwin {

void PlModel::validate() const {
  if (!(std::isfinite(a_db) && std::isfinite(b_db_per_decade))) throw InvariantError("PL model is not finite");
  if (!(std::isfinite(d_min) && d_min > 0.0)) throw InvariantError("PL d_min must be > 0");
}

PlModel fit_pl(const Dataset& ds, double d_min) {
  if (!(std::isfinite(d_min) && d_min > 0.0)) throw PreconditionError("d_min must be > 0");
  if (ds.size() < 2) throw PreconditionError("PL fit needs at least 2 samples");
  // Centered sums keep the normal equations well conditioned.
  const double n = static_cast<double>(ds.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : ds.samples) {
    mean_x += std::log10(std::max(distance(s.tx, s.rx), d_min));
    mean_y += -s.gain_db;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : ds.samples) {
    const double dx = std::log10(std::max(distance(s.tx, s.rx), d_min)) - mean_x;
    sxx += dx * dx;
    sxy += dx * (-s.gain_db - mean_y);
  }
  if (!(sxx > 1e-12 * n)) {
    throw SingularSystemError("PL fit is singular: all samples share one (clamped) distance");
  }
  PlModel m;
  m.b_db_per_decade = sxy / sxx;
  m.a_db = mean_y - m.b_db_per_decade * mean_x;
  m.d_min = d_min;
  m.validate();
  return m;
}

double pl_predict(const PlModel& model, Position tx, Position rx) {
  const double d = std::max(distance(tx, rx), model.d_min);
  return -(model.a_db + model.b_db_per_decade * std::log10(d));
}

std::string pl_to_text(const PlModel& m) {
  m.validate();
  return format_double(m.a_db) + ' ' + format_double(m.b_db_per_decade) + ' ' +
         format_double(m.d_min) + '\n';
}

PlModel pl_from_text(const std::string& text) {
  std::string line = text.substr(0, text.find('\n'));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto tokens = split(line, ' ');
  if (tokens.size() != 3) throw ParseError("PL model: expected 'a_db b_db_per_decade d_min'");
  PlModel m{parse_double(tokens[0]), parse_double(tokens[1]), parse_double(tokens[2])};
  try {
    m.validate();
  } catch (const InvariantError& e) {
    throw ParseError(std::string("PL model: ") + e.what());
  }
  return m;
}

void save_pl(const PlModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, pl_to_text(model));
}

PlModel load_pl(const std::filesystem::path& path) { return pl_from_text(read_text_file(path)); }

}  // namespace chtwin
