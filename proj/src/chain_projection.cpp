#include "coxmec/chain_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coxmec/errors.hpp"

namespace coxmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/*
 * One linear piece of the derivative, stored lazily.  The DP applies two
 * bulk updates per step: every piece on one side of the root shifts by
 * the band width, and every piece gains the line x - z (the next
 * quadratic).  Instead of touching each piece, each side keeps a
 * cumulative shift sigma and a cumulative accumulator w = sum over past
 * steps of (sigma at that step - z of that step); a piece records the
 * counter values at its last write, and the true state is recovered on
 * contact:
 *
 *   x_true   = x + sigma
 *   s_true   = s + (Q - q)
 *   phi_true = phi + (Q - q) x + (w_side - w)
 *
 * since the quadratic at step j adds (x + sigma_j) - z_j to the piece's
 * value at its (shifted) start, and summing over the steps since the
 * stamp gives (Q - q) x plus the w difference.
 */
struct Piece {
  double x;   // start, relative to the owning side's sigma
  double phi; // derivative value at the start, as of the stamp
  double s;   // slope, as of the stamp
  int q;      // quadratic count at the stamp
  double w;   // owning side's accumulator at the stamp
};

struct Side {
  double sigma = 0.0;
  double w = 0.0;
};

struct Mat { // materialized piece
  double x, phi, s;
};

struct Workspace {
  std::vector<Piece> left;  // pieces left of the root, ascending; head trims the bottom
  std::vector<Piece> right; // pieces right of the root, back() is the leftmost
  std::size_t head = 0;
  std::vector<double> roots, doms, lo;
};

struct RootInfo {
  double r;      // first point with derivative >= 0, clamped to the domain
  double phi;    // derivative at r from the right (0 unless pinned or at a jump)
  double s;      // slope of the continuation at r
  bool fragment; // true if the continuation piece is not already stored
};

class ChainDp {
public:
  ChainDp(Workspace& ws, int& q) : ws_(ws), q_(q) {}

  Mat materialize(const Piece& p, const Side& side) const {
    return {p.x + side.sigma, p.phi + (q_ - p.q) * p.x + (side.w - p.w),
            p.s + (q_ - p.q)};
  }

  Piece stamp(double x_true, double phi, double s, const Side& side) const {
    return {x_true - side.sigma, phi, s, q_, side.w};
  }

  /*
   * Positions are stored relative to sigma, so two pieces whose true
   * starts differ by less than an ulp of sigma can quantize to the same
   * (or inverted) relative coordinate.  Clamping restores the ordering
   * at the cost of an O(ulp) position error, and the zero-length piece
   * that results is kept rather than overwritten: dropping it would
   * delete a real piece of the derivative whenever a band is smaller
   * than the quantization step.  Zero-length pieces are skipped
   * naturally by every scan.
   */
  void push_right(double x_true, double phi, double s, const Side& r_side) {
    Piece p = stamp(x_true, phi, s, r_side);
    if (!ws_.right.empty()) p.x = std::min(p.x, ws_.right.back().x);
    ws_.right.push_back(p);
  }

  void push_left(double x_true, double phi, double s, const Side& l_side) {
    Piece p = stamp(x_true, phi, s, l_side);
    if (ws_.left.size() > ws_.head) p.x = std::max(p.x, ws_.left.back().x);
    ws_.left.push_back(p);
  }

  bool left_empty() const { return ws_.left.size() == ws_.head; }

  double right_start(const Side& r_side) const {
    return ws_.right.empty() ? kInf : ws_.right.back().x + r_side.sigma;
  }

  /*
   * Locates the smallest point where the nondecreasing derivative turns
   * nonnegative, materializing and transferring the pieces the search
   * walks across so the stacks stay separated at the root.  Costs O(1 +
   * pieces crossed), which for the near-feasible inputs the solver
   * produces is almost always O(1).
   */
  RootInfo find_root(Side& l_side, Side& r_side) {
    // Right phase: while the derivative is still negative at the stack
    // boundary, the root lies further right.
    while (!ws_.right.empty()) {
      const Mat m = materialize(ws_.right.back(), r_side);
      if (m.phi >= 0.0) break;
      ws_.right.pop_back();
      const double end = right_start(r_side);
      const double r = m.s > 0.0 ? m.x - m.phi / m.s : kInf;
      if (r < end) {
        if (r > m.x) push_left(m.x, m.phi, m.s, l_side);
        return {r, 0.0, m.s, true};
      }
      push_left(m.x, m.phi, m.s, l_side); // crossed entirely
    }

    // Left phase: walk down while the derivative at piece starts is
    // still nonnegative.
    double bx = right_start(r_side);
    double bphi = kInf, bs = 0.0;
    if (!ws_.right.empty()) {
      const Mat m = materialize(ws_.right.back(), r_side);
      bphi = m.phi;
      bs = m.s;
    }
    while (!left_empty()) {
      const Mat m = materialize(ws_.left.back(), l_side);
      if (m.phi >= 0.0) {
        ws_.left.pop_back();
        push_right(m.x, m.phi, m.s, r_side);
        bx = m.x;
        bphi = m.phi;
        bs = m.s;
        continue;
      }
      const double r = m.s > 0.0 ? m.x - m.phi / m.s : kInf;
      if (r < bx) return {r, 0.0, m.s, true};
      return {bx, bphi, bs, false}; // root at an upward jump
    }
    // Derivative nonnegative on the whole domain: minimum pinned at the
    // domain edge, which is the start of the bottom stored piece.
    return {bx, bphi, bs, false};
  }

  // Trims everything strictly below the new domain edge and re-anchors
  // the bottom piece there.
  void prune(double dom, Side& l_side, Side& r_side) {
    while (!left_empty()) {
      const Mat m = materialize(ws_.left[ws_.head], l_side);
      const double end = ws_.head + 1 < ws_.left.size()
                             ? ws_.left[ws_.head + 1].x + l_side.sigma
                             : right_start(r_side);
      if (end <= dom) {
        ++ws_.head;
        continue;
      }
      if (m.x < dom)
        ws_.left[ws_.head] = stamp(dom, m.phi + m.s * (dom - m.x), m.s, l_side);
      return;
    }
    while (!ws_.right.empty()) {
      const Mat m = materialize(ws_.right.back(), r_side);
      const double end = ws_.right.size() > 1
                             ? ws_.right[ws_.right.size() - 2].x + r_side.sigma
                             : kInf;
      if (end <= dom) {
        ws_.right.pop_back();
        continue;
      }
      if (m.x < dom)
        ws_.right.back() = stamp(dom, m.phi + m.s * (dom - m.x), m.s, r_side);
      return;
    }
  }

private:
  Workspace& ws_;
  int& q_;
};

} // namespace

std::vector<double> project_chain(const std::vector<double>& z,
                                  const std::vector<double>& lower,
                                  const std::vector<double>& band) {
  const std::size_t K = z.size();
  if (K == 0) throw usage_error("project_chain: empty input");
  if (lower.size() != K || band.size() + 1 != K)
    throw usage_error("project_chain: size mismatch (need K lower bounds, K-1 bands)");
  for (double c : band)
    if (!(c >= 0.0)) throw usage_error("project_chain: bands must be nonnegative");

  thread_local Workspace ws;
  ws.left.clear();
  ws.right.clear();
  ws.head = 0;

  // A lower bound more than the total band span below min z can never
  // bind (shifting the whole chain up would improve the objective), so
  // clamp such bounds to data scale; extreme sentinel bounds would
  // otherwise wreck the piece arithmetic through cancellation.
  double slack = 1.0;
  for (double c : band) slack += c;
  const double never_binds = *std::min_element(z.begin(), z.end()) - slack;
  ws.lo.resize(K);
  for (std::size_t k = 0; k < K; ++k) ws.lo[k] = std::max(lower[k], never_binds);

  ws.roots.resize(K);
  ws.doms.resize(K);

  int q = 0;
  Side ls, rs;
  ChainDp dp(ws, q);

  double dom = ws.lo[0];
  ws.doms[0] = dom;
  // Derivative of (x - z_0)^2 / 2 on [dom, inf).
  ws.right.push_back(dp.stamp(dom, dom - z[0], 1.0, rs));

  for (std::size_t k = 0; k + 1 < K; ++k) {
    const RootInfo ri = dp.find_root(ls, rs);
    ws.roots[k] = ri.r;
    const double c = band[k];

    if (c > 0.0) {
      // Inf-convolution with [-c, c]: the sides move apart and a flat
      // valley of width 2c fills the gap; a pinned minimum keeps its
      // positive derivative as an upward jump at the valley's right edge.
      ls.sigma -= c;
      rs.sigma += c;
      if (ri.fragment) dp.push_right(ri.r + c, ri.phi, ri.s, rs);
      dp.push_right(ri.r - c, 0.0, 0.0, rs);
    } else if (ri.fragment) {
      // Zero band: identity convolution, just store the continuation so
      // the stacks stay separated at the root.
      dp.push_right(ri.r, ri.phi, ri.s, rs);
    }

    // Add the quadratic centered at z_{k+1}: every piece gains x - z.
    ls.w += ls.sigma - z[k + 1];
    rs.w += rs.sigma - z[k + 1];
    ++q;

    dom = std::max(ws.lo[k + 1], dom - c);
    ws.doms[k + 1] = dom;
    dp.prune(dom, ls, rs);

    if (ws.head > 64 && 2 * ws.head > ws.left.size()) {
      ws.left.erase(ws.left.begin(), ws.left.begin() + static_cast<std::ptrdiff_t>(ws.head));
      ws.head = 0;
    }
  }
  ws.roots[K - 1] = dp.find_root(ls, rs).r;

  std::vector<double> v(K);
  v[K - 1] = ws.roots[K - 1];
  for (std::size_t k = K - 1; k-- > 0;) {
    const double lo = std::max(v[k + 1] - band[k], ws.doms[k]);
    const double hi = v[k + 1] + band[k];
    v[k] = std::clamp(ws.roots[k], lo, hi);
  }
  return v;
}

} // namespace coxmec
