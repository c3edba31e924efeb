#include "coxmec/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "coxmec/errors.hpp"

namespace coxmec {

NelderMeadResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& start, const ParamBox& box,
                                      const NelderMeadConfig& config) {
  const Eigen::Index m = box.dim();
  if (start.size() != m) throw usage_error("nelder_mead_maximize: start has wrong dimension");
  if (config.max_evals < m + 2) throw usage_error("nelder_mead_maximize: eval budget too small");

  NelderMeadResult res;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  xs.push_back(box.clip(start));
  fs.push_back(eval(xs[0]));
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd x = xs[0];
    const double width = box.upper[j] - box.lower[j];
    double step = 0.05 * width;
    if (step > 0.0 && x[j] + step > box.upper[j]) step = -step;
    x[j] += step;
    xs.push_back(box.clip(x));
    fs.push_back(eval(xs.back()));
  }
  const std::size_t nv = xs.size();

  std::vector<std::size_t> ord(nv);
  auto sort_simplex = [&] {
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] > fs[b]; });
  };
  sort_simplex();

  while (evals < config.max_evals) {
    const std::size_t best = ord[0], worst = ord[nv - 1], second = ord[nv - 2];

    double diam = 0.0;
    for (std::size_t i = 1; i < nv; ++i)
      diam = std::max(diam, (xs[ord[i]] - xs[best]).lpNorm<Eigen::Infinity>());
    const double fspread = fs[best] - fs[worst];
    if (diam <= config.x_tol * (1.0 + xs[best].lpNorm<Eigen::Infinity>()) &&
        fspread <= config.f_tol * (1.0 + std::abs(fs[best]))) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i + 1 < nv; ++i) centroid += xs[ord[i]];
    centroid /= static_cast<double>(nv - 1);

    Eigen::VectorXd xr = box.clip(centroid + (centroid - xs[worst]));
    const double fr = eval(xr);
    if (fr > fs[best]) {
      Eigen::VectorXd xe = box.clip(centroid + 2.0 * (centroid - xs[worst]));
      const double fe = eval(xe);
      if (fe > fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr > fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const bool outside = fr > fs[worst];
      Eigen::VectorXd xc =
          box.clip(centroid + 0.5 * ((outside ? xr : xs[worst]) - centroid));
      const double fc = eval(xc);
      if (fc > (outside ? fr : fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (std::size_t i = 1; i < nv; ++i) {
          const std::size_t k = ord[i];
          xs[k] = box.clip(xs[ord[0]] + 0.5 * (xs[k] - xs[ord[0]]));
          fs[k] = eval(xs[k]);
          if (evals >= config.max_evals) break;
        }
      }
    }
    sort_simplex();
  }

  sort_simplex();
  res.x = xs[ord[0]];
  res.f = fs[ord[0]];
  res.evals = evals;
  return res;
}

} // namespace coxmec
