#ifndef FSEARCH_DATASET_HPP
#define FSEARCH_DATASET_HPP

#include <Eigen/Dense>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsearch {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Regression data y = X beta + eps. true_beta/true_sigma are only set in
// simulation mode, where the data-generating process is known.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> regressor_names;
  std::optional<Eigen::VectorXd> true_beta;
  std::optional<double> true_sigma;

  int n() const { return static_cast<int>(y.size()); }
  int dim_x() const { return static_cast<int>(X.cols()); }

  void validate() const {
    if (X.rows() != y.size()) throw DataError("y and X row counts differ");
    if (dim_x() < 1) throw DataError("need at least one regressor");
    if (n() <= dim_x())
      throw DataError("need n > dim x (n = " + std::to_string(n()) +
                      ", dim x = " + std::to_string(dim_x()) + ")");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    if (qr.rank() < dim_x())
      throw DataError("X is rank deficient on the full sample");
  }
};

// CSV with a header row; the column named "y" is the response, all other
// columns are numeric regressors.
inline Dataset load_csv(const std::string& path, bool add_intercept = false) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  int ycol = -1;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == "y") ycol = static_cast<int>(j);
  if (ycol < 0) throw DataError(path + ": no column named 'y' in header");
  const int ncols = static_cast<int>(names.size());
  if (ncols < 2 && !add_intercept)
    throw DataError(path + ": no regressor columns");

  std::vector<double> yv;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw DataError(path + ": row " + std::to_string(lineno) + ", column " +
                        names[std::min<std::size_t>(col - 1, names.size() - 1)] +
                        ": not a number: '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != ncols)
      throw DataError(path + ": row " + std::to_string(lineno) + ": expected " +
                      std::to_string(ncols) + " cells, got " +
                      std::to_string(row.size()));
    yv.push_back(row[ycol]);
    row.erase(row.begin() + ycol);
    rows.push_back(std::move(row));
  }
  if (yv.empty()) throw DataError(path + ": no data rows");

  Dataset d;
  const int n = static_cast<int>(yv.size());
  const int p = ncols - 1 + (add_intercept ? 1 : 0);
  d.y = Eigen::Map<Eigen::VectorXd>(yv.data(), n);
  d.X.resize(n, p);
  int off = 0;
  if (add_intercept) {
    d.X.col(0).setOnes();
    d.regressor_names.push_back("intercept");
    off = 1;
  }
  for (int j = 0; j < ncols - 1; ++j) {
    for (int i = 0; i < n; ++i) d.X(i, off + j) = rows[i][j];
  }
  for (int j = 0; j < ncols; ++j)
    if (j != static_cast<int>(ycol)) d.regressor_names.push_back(names[j]);
  d.validate();
  return d;
}

}  // namespace fsearch

#endif
