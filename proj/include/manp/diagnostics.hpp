#ifndef MANP_DIAGNOSTICS_HPP
#define MANP_DIAGNOSTICS_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "manp/state.hpp"

namespace manp {

double total_mass(const CellField& c);
double min_concentration(const CellField& c);

/// Σ_cells Σ_l c(ln c - 1)·V + Σ_faces D²/(2ε)·w, where w is the cell volume
/// and half of it on boundary faces of a non-periodic layout. Fixed-charge
/// interaction is not included.
double free_energy(const SimulationState& s);

/// Root mean square of the cell-wise difference.
double error_concentration(const CellField& num, const CellField& ref);
/// Mean over cells of the 2-norm of the difference after face-to-cell averaging.
double error_displacement(const FaceField& num, const FaceField& ref);

/// max_cells |div D - (Σ q c + ρ^f)|.
double gauss_residual(const SimulationState& s);
/// max over interior nodes of |curl(D/ε)|. 2D only.
double curl_residual(const SimulationState& s);

/// Named channels sampled at shared, strictly increasing times.
class TimeSeriesLog {
 public:
  TimeSeriesLog() = default;
  explicit TimeSeriesLog(std::vector<std::string> channels);

  const std::vector<std::string>& channels() const { return channels_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& column(const std::string& name) const;
  std::size_t size() const { return times_.size(); }

  /// Values in channel order; the time must exceed the previous one.
  void append(double t, const std::vector<double>& values);

  /// Comment lines (without '#') written above the CSV header.
  std::vector<std::string> header_comments;

  /// "# ..." comments, then "time,ch1,...", then rows with %.17g.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  static TimeSeriesLog read_csv(std::istream& in);
  static TimeSeriesLog read_csv(const std::string& path);

 private:
  std::vector<std::string> channels_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;  // per channel
};

}  // namespace manp

#endif  // MANP_DIAGNOSTICS_HPP
