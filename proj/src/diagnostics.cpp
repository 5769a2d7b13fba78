#include "manp/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "manp/errors.hpp"

namespace manp {

double total_mass(const CellField& c) { return c.values.sum() * c.grid.cell_volume(); }

double min_concentration(const CellField& c) { return c.values.minCoeff(); }

double free_energy(const SimulationState& s) {
  const StaggeredGrid& g = s.grid();
  const double v = g.cell_volume();
  double entropy = 0.0;
  for (const Species& sp : s.species) {
    if (!(sp.c.values.minCoeff() > 0.0)) {
      throw NonpositiveConcentration("free energy needs positive concentrations");
    }
    entropy += (sp.c.values.array() * (sp.c.values.array().log() - 1.0)).sum();
  }
  double field = 0.0;
  for_each_face(g, [&](const FaceRef& f) {
    const double d = (f.component == 0 ? s.displacement.x : s.displacement.y)[f.index];
    const double e = (f.component == 0 ? s.eps.face_values.x : s.eps.face_values.y)[f.index];
    const double w = (f.lo < 0 || f.hi < 0) ? 0.5 : 1.0;
    field += w * d * d / (2.0 * e);
  });
  return (entropy + field) * v;
}

double error_concentration(const CellField& num, const CellField& ref) {
  if (num.values.size() != ref.values.size()) throw ConfigError("grid mismatch");
  return std::sqrt((num.values - ref.values).squaredNorm() / static_cast<double>(num.values.size()));
}

double error_displacement(const FaceField& num, const FaceField& ref) {
  if (num.x.size() != ref.x.size() || num.y.size() != ref.y.size()) {
    throw ConfigError("grid mismatch");
  }
  FaceField diff = num;
  diff.x -= ref.x;
  diff.y -= ref.y;
  const auto c = interpolate_face_to_cell(diff);
  if (num.grid.dim == 1) return c[0].cwiseAbs().mean();
  return (c[0].array().square() + c[1].array().square()).sqrt().mean();
}

double gauss_residual(const SimulationState& s) {
  return (divergence(s.displacement).values - s.charge()).lpNorm<Eigen::Infinity>();
}

double curl_residual(const SimulationState& s) {
  const NodeField c = discrete_curl(s.displacement, s.eps);
  return c.values.lpNorm<Eigen::Infinity>();
}

TimeSeriesLog::TimeSeriesLog(std::vector<std::string> channels)
    : channels_(std::move(channels)), values_(channels_.size()) {}

const std::vector<double>& TimeSeriesLog::column(const std::string& name) const {
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    if (channels_[k] == name) return values_[k];
  }
  throw ConfigError("no channel named " + name);
}

void TimeSeriesLog::append(double t, const std::vector<double>& values) {
  if (values.size() != channels_.size()) throw ConfigError("channel count mismatch");
  if (!times_.empty() && !(t > times_.back())) throw ConfigError("times must increase");
  times_.push_back(t);
  for (std::size_t k = 0; k < values.size(); ++k) values_[k].push_back(values[k]);
}

void TimeSeriesLog::write_csv(std::ostream& out) const {
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "time";
  for (const auto& c : channels_) out << ',' << c;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < times_.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", times_[r]);
    out << buf;
    for (const auto& col : values_) {
      std::snprintf(buf, sizeof buf, "%.17g", col[r]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void TimeSeriesLog::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write_csv(f);
}

TimeSeriesLog TimeSeriesLog::read_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> comments;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    comments.push_back(line.size() > 2 ? line.substr(2) : "");
  }
  if (line.rfind("time", 0) != 0) throw ParseError("time-series CSV lacks a 'time' header");
  std::vector<std::string> names;
  {
    std::istringstream hs(line);
    std::string tok;
    std::getline(hs, tok, ',');
    while (std::getline(hs, tok, ',')) names.push_back(tok);
  }
  TimeSeriesLog log(names);
  log.header_comments = comments;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(rs, tok, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("bad CSV value '" + tok + "'");
      }
    }
    if (row.size() != names.size() + 1) throw ParseError("CSV row has the wrong column count");
    try {
      log.append(row[0], std::vector<double>(row.begin() + 1, row.end()));
    } catch (const ConfigError& e) {
      throw ParseError(e.what());
    }
  }
  return log;
}

TimeSeriesLog TimeSeriesLog::read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot read " + path);
  return read_csv(f);
}

}  // namespace manp
