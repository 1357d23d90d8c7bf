#include "fwlab/graph_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fwlab/errors.hpp"
#include "fwlab/parallel.hpp"
#include "fwlab/rng.hpp"

namespace fwlab {

namespace {
constexpr double kForever = std::numeric_limits<double>::infinity();
}  // namespace

double StickyChain::vertex_rate() const { return std::accumulate(lambda.begin(), lambda.end(), 0.0); }

double StickyChain::vertex_holding() const {
  const double ps = std::accumulate(p.begin(), p.end(), 0.0);
  return 2.0 * ergodic_area * delta / ps;
}

std::size_t StickyChain::size() const {
  std::size_t n = 1;
  for (const auto& e : edges) n += e.size();
  return n;
}

StickyChain build_chain(const ReebGraph& graph, const std::vector<EdgeCoefficients>& coeffs, double delta,
                        const ChainOptions& opt) {
  if (coeffs.size() != graph.edges.size() || graph.p.size() != graph.edges.size())
    fail(ErrorKind::PreconditionViolated, "graph and coefficient tables disagree");
  if (!(delta > 0)) fail(ErrorKind::ConfigInvalid, "delta must be > 0");
  StickyChain ch;
  ch.delta = delta;
  ch.ergodic_area = graph.ergodic_area;
  ch.p = graph.p;
  for (double pk : ch.p) ch.lambda.push_back(pk / (2.0 * ch.ergodic_area * delta));
  auto bad = [](int k, double h, const char* dir, double v) {
    fail(ErrorKind::RatePositivityViolated, std::string(dir) + " rate " + std::to_string(v) + " at h = " +
                                                std::to_string(h) + " on edge " + std::to_string(k));
  };
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const EdgeCoefficients& c = coeffs[k];
    const double hr = c.h_range;
    if (hr <= 2 * delta) fail(ErrorKind::RatePositivityViolated, "delta too coarse for edge " + std::to_string(k));
    ChainEdge e;
    e.k = static_cast<int>(k);
    e.h.push_back(delta);
    auto fill = [&](double to) {
      const double from = e.h.back();
      const long m = std::max(1L, std::lround((to - from) / delta));
      for (long i = 1; i <= m; ++i) e.h.push_back(i == m ? to : from + i * (to - from) / m);
    };
    if (opt.knot > 2 * delta && opt.knot < hr - delta) fill(opt.knot);
    fill(hr);
    const std::size_t M = e.h.size();
    e.up.assign(M, 0.0);
    e.down.assign(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
      const double h = e.h[i];
      const double dl = h - (i == 0 ? 0.0 : e.h[i - 1]);
      const double a = c.a(h), b = c.b(h);
      if (i + 1 == M) {
        if (opt.far_end == FarEnd::Absorbing) break;
        // reflecting end, one-sided
        e.down[i] = 2.0 * a / (dl * dl) + std::max(-b, 0.0) / dl;
      } else {
        const double dr = e.h[i + 1] - h;
        if (opt.split == DriftSplit::Upwind) {
          e.up[i] = 2.0 * a / (dr * (dl + dr)) + std::max(b, 0.0) / dr;
          e.down[i] = 2.0 * a / (dl * (dl + dr)) + std::max(-b, 0.0) / dl;
        } else {
          e.up[i] = (2.0 * a + b * dl) / (dr * (dl + dr));
          e.down[i] = (2.0 * a - b * dr) / (dl * (dl + dr));
        }
        if (!(e.up[i] > 0) || !std::isfinite(e.up[i])) bad(e.k, h, "up", e.up[i]);
      }
      if (!(e.down[i] > 0) || !std::isfinite(e.down[i])) bad(e.k, h, "down", e.down[i]);
    }
    ch.edges.push_back(std::move(e));
  }
  return ch;
}

GraphTrajectoryStats simulate_chain(const StickyChain& chain, double T, std::uint64_t seed,
                                    const ChainSimOptions& opt) {
  const std::size_t ne = chain.edges.size();
  const int np = std::max(1, opt.pieces);
  const double Tp = T / np;
  const double ps = std::accumulate(chain.p.begin(), chain.p.end(), 0.0);
  const double vrate = chain.ergodic_area > 0 ? chain.vertex_rate() : 0.0;
  std::vector<double> cum(ne);
  for (std::size_t k = 0; k < ne; ++k) cum[k] = (k ? cum[k - 1] : 0.0) + chain.p[k] / ps;

  struct Piece {
    double tv = 0.0;
    std::vector<double> te;
    std::vector<double> hits;
    std::int64_t jumps = 0;
  };
  std::vector<Piece> out(np);
  parallel_for(np, opt.threads, [&](std::size_t pi) {
    const PhiloxStream rng(seed, pi);
    Piece& P = out[pi];
    P.te.assign(ne, 0.0);
    int e = -1;
    std::size_t i = 0;
    double t = 0.0, start = 0.0;
    bool armed = opt.h_star > 0;
    for (std::uint64_t ctr = 0; t < Tp; ++ctr) {
      const auto [u1, u2] = rng.uniform2(ctr);
      double rate;
      if (e < 0) {
        rate = vrate;
      } else {
        const ChainEdge& E = chain.edges[e];
        rate = E.up[i] + E.down[i];
      }
      // a zero rate means an instantaneous vertex (Area(E) = 0) or an
      // absorbing far end
      double hold = rate > 0 ? -std::log1p(-u1) / rate : (e < 0 ? 0.0 : kForever);
      const double dt = std::min(hold, Tp - t);
      if (e < 0)
        P.tv += dt;
      else
        P.te[e] += dt;
      t += hold;
      if (t >= Tp) break;
      ++P.jumps;
      if (e < 0) {
        std::size_t k = 0;
        while (k + 1 < ne && u2 >= cum[k]) ++k;
        e = static_cast<int>(k);
        i = 0;
      } else {
        const ChainEdge& E = chain.edges[e];
        if (u2 * (E.up[i] + E.down[i]) < E.up[i]) {
          ++i;
        } else if (i == 0) {
          e = -1;
          if (opt.h_star > 0 && !armed) armed = true, start = t;
        } else {
          --i;
        }
      }
      if (armed && e >= 0 && chain.edges[e].h[i] >= opt.h_star) {
        P.hits.push_back(t - start);
        armed = false;
      }
    }
  });

  GraphTrajectoryStats st;
  st.T = T;
  std::vector<double> fv(np);
  std::vector<std::vector<double>> fe(ne, std::vector<double>(np));
  for (int pi = 0; pi < np; ++pi) {
    fv[pi] = out[pi].tv / Tp;
    for (std::size_t k = 0; k < ne; ++k) fe[k][pi] = out[pi].te[k] / Tp;
    st.jumps += out[pi].jumps;
    st.hitting.insert(st.hitting.end(), out[pi].hits.begin(), out[pi].hits.end());
  }
  const MeanSE v = mean_se(fv);
  st.vertex_frac = v.mean;
  st.vertex_se = v.stderr_;
  for (std::size_t k = 0; k < ne; ++k) {
    const MeanSE m = mean_se(fe[k]);
    st.edge_frac.push_back(m.mean);
    st.edge_se.push_back(m.stderr_);
  }
  return st;
}

std::size_t StarMatrix::size() const {
  std::size_t n = 1;
  for (const auto& b : bands) n += b.di.size();
  return n;
}

StarMatrix StarMatrix::transpose() const {
  StarMatrix t = *this;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const Band& b = bands[k];
    Band& o = t.bands[k];
    const std::size_t M = b.di.size();
    if (M == 0) continue;
    t.row0[k] = b.lo[0];
    o.lo[0] = row0[k];
    for (std::size_t i = 1; i < M; ++i) o.lo[i] = b.up[i - 1];
    for (std::size_t i = 0; i + 1 < M; ++i) o.up[i] = b.lo[i + 1];
    o.up[M - 1] = 0.0;
  }
  return t;
}

StarMatrix StarMatrix::shifted(double c) const {
  StarMatrix s = *this;
  s.d0 = 1.0 - c * d0;
  for (double& v : s.row0) v *= -c;
  for (auto& b : s.bands) {
    for (double& v : b.lo) v *= -c;
    for (double& v : b.up) v *= -c;
    for (double& v : b.di) v = 1.0 - c * v;
  }
  return s;
}

std::vector<double> StarMatrix::apply(const std::vector<double>& x) const {
  std::vector<double> y(x.size(), 0.0);
  y[0] = d0 * x[0];
  std::size_t off = 1;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const Band& b = bands[k];
    const std::size_t M = b.di.size();
    if (M == 0) continue;
    y[0] += row0[k] * x[off];
    for (std::size_t i = 0; i < M; ++i) {
      const double prev = i == 0 ? x[0] : x[off + i - 1];
      const double next = i + 1 < M ? x[off + i + 1] : 0.0;
      y[off + i] = b.lo[i] * prev + b.di[i] * x[off + i] + b.up[i] * next;
    }
    off += M;
  }
  return y;
}

std::vector<double> StarMatrix::solve(const std::vector<double>& r) const {
  // eliminate each path from its far end: x_i = s_i + t_i x_{i-1}
  std::vector<double> x(r.size(), 0.0);
  std::vector<std::vector<double>> S(bands.size()), Tm(bands.size());
  double diag = d0, rhs = r[0];
  std::size_t off = 1;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const Band& b = bands[k];
    const std::size_t M = b.di.size();
    S[k].assign(M, 0.0);
    Tm[k].assign(M, 0.0);
    for (std::size_t j = M; j-- > 0;) {
      const double up = j + 1 < M ? b.up[j] : 0.0;
      const double sn = j + 1 < M ? S[k][j + 1] : 0.0, tn = j + 1 < M ? Tm[k][j + 1] : 0.0;
      const double den = b.di[j] + up * tn;
      if (den == 0.0) fail(ErrorKind::NoConvergence, "singular star system");
      S[k][j] = (r[off + j] - up * sn) / den;
      Tm[k][j] = -b.lo[j] / den;
    }
    if (M > 0) {
      diag += row0[k] * Tm[k][0];
      rhs -= row0[k] * S[k][0];
    }
    off += M;
  }
  if (diag == 0.0) fail(ErrorKind::NoConvergence, "singular star system at the vertex");
  x[0] = rhs / diag;
  off = 1;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const std::size_t M = bands[k].di.size();
    double prev = x[0];
    for (std::size_t j = 0; j < M; ++j) prev = x[off + j] = S[k][j] + Tm[k][j] * prev;
    off += M;
  }
  return x;
}

StarMatrix chain_generator(const StickyChain& chain, double h_cut) {
  StarMatrix q;
  q.d0 = -chain.vertex_rate();
  q.row0 = chain.lambda;
  for (const ChainEdge& e : chain.edges) {
    StarMatrix::Band b;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (h_cut > 0 && e.h[i] >= h_cut) break;
      b.lo.push_back(e.down[i]);
      b.di.push_back(-(e.up[i] + e.down[i]));
      b.up.push_back(e.up[i]);
    }
    q.bands.push_back(std::move(b));
  }
  return q;
}

double chain_mean_hitting(const StickyChain& chain, double h_star) {
  if (!(chain.ergodic_area > 0)) fail(ErrorKind::PreconditionViolated, "exact solves need Area(E) > 0");
  const StarMatrix q = chain_generator(chain, h_star);
  // Q m = -1 on the transient states
  return q.solve(std::vector<double>(q.size(), -1.0))[0];
}

std::vector<double> chain_mean_to_vertex(const StickyChain& chain, int k) {
  if (k < 0 || k >= static_cast<int>(chain.edges.size()))
    fail(ErrorKind::PreconditionViolated, "no edge " + std::to_string(k));
  // vertex made absorbing: identity row, zero right-hand side
  StarMatrix q = chain_generator(chain);
  q.d0 = 1.0;
  for (std::size_t j = 0; j < q.bands.size(); ++j) {
    q.row0[j] = 0.0;
    if (static_cast<int>(j) != k) q.bands[j] = {};
  }
  std::vector<double> r(q.size(), -1.0);
  r[0] = 0.0;
  std::vector<double> x = q.solve(r);
  return {x.begin() + 1, x.end()};
}

double HittingCdf::operator()(double x) const {
  if (t.empty() || x <= t.front()) return F.empty() ? 0.0 : F.front();
  if (x >= t.back()) return F.back();
  const auto it = std::upper_bound(t.begin(), t.end(), x);
  const std::size_t j = it - t.begin();
  const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
  return F[j - 1] + w * (F[j] - F[j - 1]);
}

namespace {

// TR-BDF2 on p' = A p with a time grid that starts fine and grows
// geometrically; cb(t, p) after every step
template <class Cb>
void trbdf2(const StarMatrix& A, std::vector<double> p, double t_end, int steps, Cb&& cb) {
  const double g = 2.0 - std::sqrt(2.0);
  const double w1 = 1.0 / (g * (2.0 - g)), w0 = (1.0 - g) * (1.0 - g) / (g * (2.0 - g));
  const double c2 = (1.0 - g) / (2.0 - g);
  // geometric grid: dt_j = dt0 * q^j summing to t_end, first step t_end * 1e-7
  const double dt0 = t_end * 1e-7;
  double q = 1.01;
  for (int it = 0; it < 200; ++it) {
    const double sum = dt0 * (std::pow(q, steps) - 1) / (q - 1);
    q *= std::pow(t_end / sum, 0.5 / steps);
  }
  double t = 0.0, dt = dt0;
  double last_dt = -1.0;
  StarMatrix L1, L2;
  cb(0.0, p);
  for (int j = 0; j < steps; ++j) {
    if (j + 1 == steps) dt = t_end - t;
    if (dt != last_dt) {
      L1 = A.shifted(0.5 * g * dt);
      L2 = A.shifted(c2 * dt);
      last_dt = dt;
    }
    std::vector<double> ap = A.apply(p);
    std::vector<double> r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = p[i] + 0.5 * g * dt * ap[i];
    const std::vector<double> pg = L1.solve(r);
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = w1 * pg[i] - w0 * p[i];
    p = L2.solve(r);
    t += dt;
    cb(t, p);
    dt *= q;
  }
}

}  // namespace

HittingCdf chain_hitting_cdf(const StickyChain& chain, double h_star, double t_end, int steps) {
  if (!(chain.ergodic_area > 0)) fail(ErrorKind::PreconditionViolated, "exact solves need Area(E) > 0");
  const StarMatrix A = chain_generator(chain, h_star).transpose();
  std::vector<double> p(A.size(), 0.0);
  p[0] = 1.0;
  HittingCdf cdf;
  trbdf2(A, p, t_end, steps, [&](double t, const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    cdf.t.push_back(t);
    cdf.F.push_back(std::clamp(1.0 - s, 0.0, 1.0));
  });
  return cdf;
}

double chain_vertex_occupation(const StickyChain& chain, double horizon, int steps) {
  if (!(chain.ergodic_area > 0)) fail(ErrorKind::PreconditionViolated, "exact solves need Area(E) > 0");
  const StarMatrix A = chain_generator(chain).transpose();
  std::vector<double> p(A.size(), 0.0);
  p[0] = 1.0;
  double tp = 0.0, vp = 1.0, integral = 0.0;
  trbdf2(A, p, horizon, steps, [&](double t, const std::vector<double>& x) {
    integral += 0.5 * (t - tp) * (vp + x[0]);
    tp = t;
    vp = x[0];
  });
  return integral / horizon;
}

double graph_vertex_hitting_mean(const ReebGraph& graph, const std::vector<EdgeCoefficients>& coeffs,
                                 double h_star) {
  // on edge k, (A u')' = -2 pi' with u(h_star) = 0 and a common u(0) = U0;
  // gluing: sum p_k u_k'(0) = -2 Area(E). With c_k = A_k(0) u_k'(0),
  // A u' = c_k - 2 S_k, S_k(h) = int_0^h pi', so
  // c_k I_k - J_k = -U0, I_k = int dh / A_k, J_k = int 2 S_k / A_k.
  using boost::math::quadrature::gauss_kronrod;
  double num = 2.0 * graph.ergodic_area, den = 0.0;
  for (const EdgeCoefficients& c : coeffs) {
    if (!(h_star > 0 && h_star < c.h_range)) fail(ErrorKind::PreconditionViolated, "h_star outside the edge");
    // the exit-time table already carries A u' = 2 (Area - S)
    auto S = [&](double h) { return c.area_coarea - 0.5 * c.A(h) * c.uPrime(h); };
    const double I =
        gauss_kronrod<double, 31>::integrate([&](double h) { return 1.0 / c.A(h); }, 0.0, h_star, 10, 1e-11);
    const double J =
        gauss_kronrod<double, 31>::integrate([&](double h) { return 2.0 * S(h) / c.A(h); }, 0.0, h_star, 10, 1e-11);
    num += J / I;
    den += 1.0 / I;
  }
  return num / den;
}

Comparison compare_with_sde(const VertexHittingResult& sde, double epsilon, const StickyChain& chain,
                            double h_star, double horizon) {
  if (std::abs(sde.h_star - h_star) > 1e-12 * std::max(1.0, h_star) ||
      std::abs(sde.horizon - horizon) > 1e-12 * std::max(1.0, horizon))
    fail(ErrorKind::MismatchedObservables, "SDE and chain observables use different h* or horizon");
  if (sde.hitting.empty()) fail(ErrorKind::MismatchedObservables, "no SDE hitting samples");
  Comparison c;
  c.epsilon = epsilon;
  c.h_star = h_star;
  c.horizon = horizon;
  c.n = static_cast<std::int64_t>(sde.hitting.size());
  c.occupation_sde = sde.occupation.mean;
  c.occupation_se = sde.occupation.stderr_;
  c.occupation_chain = chain_vertex_occupation(chain, horizon);
  c.occupation_gap = std::abs(c.occupation_sde - c.occupation_chain);
  c.hit_mean_sde = sde.hit.mean;
  c.hit_mean_chain = chain_mean_hitting(chain, h_star);
  const double tmax = *std::max_element(sde.hitting.begin(), sde.hitting.end());
  const HittingCdf cdf = chain_hitting_cdf(chain, h_star, std::max(tmax, 20.0 * c.hit_mean_chain));
  c.ks = ks_one_sample(sde.hitting, cdf);
  return c;
}

}  // namespace fwlab
