#include "coxmec/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "coxmec/errors.hpp"
#include "coxmec/util.hpp"

namespace coxmec {

void Dataset::validate(double tau) const {
  if (y.size() != delta.size() || static_cast<Eigen::Index>(y.size()) != w.rows())
    throw data_error("dataset: column lengths differ");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || y[i] < 0.0)
      throw data_error("dataset: y must be finite and nonnegative (row " +
                       std::to_string(i + 1) + ")");
    if (tau >= 0.0 && y[i] > tau)
      throw data_error("dataset: y exceeds tau (row " + std::to_string(i + 1) + ")");
    if (delta[i] != 0 && delta[i] != 1)
      throw data_error("dataset: delta must be 0 or 1 (row " + std::to_string(i + 1) + ")");
  }
  if (!w.allFinite()) throw data_error("dataset: covariates must be finite");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("dataset file is empty: " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "y" || header[1] != "delta")
    throw data_error("dataset header must be y,delta,w1,...,wm");
  const std::size_t m = header.size() - 2;
  for (std::size_t j = 0; j < m; ++j) {
    if (header[2 + j] != "w" + std::to_string(j + 1))
      throw data_error("dataset header must be y,delta,w1,...,wm");
  }

  std::vector<double> ys;
  std::vector<int> deltas;
  std::vector<double> wflat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    const std::string where = " (row " + std::to_string(row) + ")";
    if (fields.size() != m + 2) throw data_error("dataset: wrong field count" + where);
    bool ok = false;
    const double yv = parse_double(fields[0], ok);
    if (!ok || std::isnan(yv)) throw data_error("dataset: bad y value" + where);
    if (yv < 0.0) throw data_error("dataset: negative y" + where);
    const double dv = parse_double(fields[1], ok);
    if (!ok || (dv != 0.0 && dv != 1.0))
      throw data_error("dataset: delta must be 0 or 1" + where);
    ys.push_back(yv);
    deltas.push_back(static_cast<int>(dv));
    for (std::size_t j = 0; j < m; ++j) {
      const double wv = parse_double(fields[2 + j], ok);
      if (!ok || std::isnan(wv)) throw data_error("dataset: bad covariate value" + where);
      wflat.push_back(wv);
    }
  }

  Dataset d;
  d.y = std::move(ys);
  d.delta = std::move(deltas);
  d.w.resize(static_cast<Eigen::Index>(d.y.size()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < d.y.size(); ++i)
    for (std::size_t j = 0; j < m; ++j)
      d.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = wflat[i * m + j];
  d.validate();
  return d;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open output file: " + path);
  out << "y,delta";
  for (Eigen::Index j = 0; j < d.w.cols(); ++j) out << ",w" << (j + 1);
  out << "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << format_double(d.y[i]) << "," << d.delta[i];
    for (Eigen::Index j = 0; j < d.w.cols(); ++j)
      out << "," << format_double(d.w(static_cast<Eigen::Index>(i), j));
    out << "\n";
  }
  if (!out) throw data_error("failed writing dataset file: " + path);
}

} // namespace coxmec
