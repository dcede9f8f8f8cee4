#include "bicon/square_root.hpp"

#include <cmath>
#include <sstream>

#include "bicon/linalg.hpp"

namespace bicon {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// ||S x S - g|| / ||g|| at the value level
double root_residual(const MetricStructure& ms, const JTensor& S) {
  const int n = ms.n;
  DTensor sv = value_of(S);
  DTensor gv(n, 2), gi(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gv.at({i, j}) = ms.g_at(i, j).value();
      gi.at({i, j}) = ms.ginv_at(i, j).value();
    }
  DTensor ss = inner_product_x(sv, sv, gi);
  return (ss - gv).frobenius() / gv.frobenius();
}

}  // namespace

SimpleFormSpec SimpleFormSpec::from_strings(
    const Chart& chart, const std::vector<std::vector<std::string>>& rows) {
  SimpleFormSpec s;
  s.chart = chart;
  for (const auto& row : rows) {
    if (row.size() != chart->size())
      throw Error("form factor component count does not match chart dimension");
    std::vector<ScalarField> f;
    for (const auto& c : row) f.push_back(ScalarField::parse(c, chart));
    s.factors.push_back(std::move(f));
  }
  if (s.factors.empty()) throw Error("simple form needs at least one factor");
  return s;
}

JPForm SimpleFormSpec::eval(std::span<const double> x, int order) const {
  const int n = dim();
  const int p = degree();
  std::vector<std::vector<Jet>> rows;
  rows.reserve(p);
  for (const auto& f : factors) {
    std::vector<Jet> r;
    r.reserve(n);
    for (const auto& c : f) r.push_back(c.eval(x, order));
    rows.push_back(std::move(r));
  }
  // Euclidean Gram determinant guards factor independence
  std::vector<double> gram(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += rows[i][c].value() * rows[j][c].value();
      gram[static_cast<std::size_t>(i) * p + j] = s;
    }
  if (std::abs(determinant(gram, p)) <= 1e-10)
    throw Error("form factors are linearly dependent at the evaluation point");
  return wedge_of_factors(rows, n);
}

DirectRootField::DirectRootField(Chart chart, std::vector<std::vector<ScalarField>> comp)
    : chart_(std::move(chart)), comp_(std::move(comp)) {}

DirectRootField DirectRootField::from_strings(
    const Chart& chart, const std::vector<std::vector<std::string>>& m) {
  const int n = static_cast<int>(chart->size());
  if (static_cast<int>(m.size()) != n) throw Error("square-root matrix has wrong row count");
  std::vector<std::vector<ScalarField>> comp(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(m[i].size()) != n)
      throw Error("square-root matrix row has wrong length");
    for (int j = 0; j < n; ++j) comp[i].push_back(ScalarField::parse(m[i][j], chart));
  }
  return DirectRootField(chart, std::move(comp));
}

RootStructure RootField::at(const MetricStructure& ms) const {
  int sign = +1;
  JTensor S = candidate(ms, &sign);
  return make_root_structure(ms, std::move(S), sign);
}

JTensor DirectRootField::candidate(const MetricStructure& ms, int* sign) const {
  if (sign) *sign = +1;
  JTensor S(ms.n, {-1, -1}, ms.sp, ms.order);
  for (int i = 0; i < ms.n; ++i)
    for (int j = 0; j < ms.n; ++j) S.at({i, j}) = comp_[i][j].eval(ms.x, ms.order);
  return S;
}

JPForm FormRootField::normalized_form(const MetricStructure& ms) const {
  JPForm omega = form_.eval(ms.x, ms.order);
  const int p = omega.p;
  Jet s2 = form_dot(omega, omega, ms.ginv);
  if (std::abs(s2.value()) <= 1e-10)
    throw Error("form is null (Omega.Omega = 0): unnormalizable");
  Jet lambda = sqrt(Jet::constant(ms.sp, ms.order, 2.0 * factorial(p)) / abs_value(s2));
  for (auto& c : omega.comp) c = c * lambda;
  return omega;
}

JTensor FormRootField::candidate(const MetricStructure& ms, int* sign) const {
  const int n = ms.n;
  JPForm omega = normalized_form(ms);
  auto t = superenergy(omega, ms.g, ms.ginv);
  JTensor S(n, {-1, -1}, ms.sp, ms.order);
  S.a = std::move(t);
  double rp = root_residual(ms, S);
  if (rp >= 1e-8) {
    std::ostringstream os;
    os << "superenergy of the normalized form is not a square root for either sign "
          "(residual " << rp << ")";
    throw Error(os.str());
  }
  // Both signs square to g; fix the one whose +1 eigenspace is the factor
  // span, probing with the first (raised) factor vector.
  std::vector<double> k(n, 0.0);
  for (int a = 0; a < n; ++a) {
    double ka = form_.factors[0][a].value(ms.x);
    for (int b = 0; b < n; ++b) k[b] += ms.ginv_at(b, a).value() * ka;
  }
  double align = 0.0;
  for (int a = 0; a < n; ++a) {
    double w = 0.0;
    for (int b = 0; b < n; ++b) {
      double smix = 0.0;
      for (int c = 0; c < n; ++c) smix += ms.ginv_at(a, c).value() * S.at({c, b}).value();
      w += smix * k[b];
    }
    align += w * k[a];
  }
  int s = align >= 0.0 ? +1 : -1;
  if (sign) *sign = s;
  return s > 0 ? S : -S;
}

BlockRootField::BlockRootField(std::vector<int> first_block, int n) : in_first_(n, 0) {
  for (int i : first_block) {
    if (i < 0 || i >= n) throw Error("block index out of range");
    in_first_[i] = 1;
  }
}

JTensor BlockRootField::candidate(const MetricStructure& ms, int* sign) const {
  if (sign) *sign = +1;
  const int n = ms.n;
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(ms.g_at(i, j).value()));
  JTensor S(n, {-1, -1}, ms.sp, ms.order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (in_first_[i] != in_first_[j]) {
        if (std::abs(ms.g_at(i, j).value()) > 1e-10 * scale)
          throw Error("metric is not block diagonal for the given split");
        S.at({i, j}) = ms.zero();
      } else {
        S.at({i, j}) = in_first_[i] ? ms.g_at(i, j) : -ms.g_at(i, j);
      }
    }
  return S;
}

RootStructure make_root_structure(const MetricStructure& ms, JTensor S, int sign,
                                  double tol) {
  const int n = ms.n;
  RootStructure rs;
  rs.n = n;
  rs.sign = sign;
  // symmetry of S at the value level
  double scale = 0.0;
  for (const auto& j : S.a) scale = std::max(scale, std::abs(j.value()));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(S.at({i, j}).value() - S.at({j, i}).value()) > 1e-10 * std::max(1.0, scale))
        throw Error("square root candidate is not symmetric");
  rs.Smix = reslot_metric(S, 0, ms.ginv, +1);
  rs.S = std::move(S);
  rs.P = JTensor(n, {-1, -1}, ms.sp, ms.order);
  rs.Pi = JTensor(n, {-1, -1}, ms.sp, ms.order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      rs.P.at({i, j}) = (ms.g_at(i, j) + rs.S.at({i, j})) * 0.5;
      rs.Pi.at({i, j}) = (ms.g_at(i, j) - rs.S.at({i, j})) * 0.5;
    }
  rs.Pmix = reslot_metric(rs.P, 0, ms.ginv, +1);
  rs.Pimix = reslot_metric(rs.Pi, 0, ms.ginv, +1);
  rs.Pup = reslot_metric(rs.Pmix, 1, ms.ginv, +1);
  rs.Piup = reslot_metric(rs.Pimix, 1, ms.ginv, +1);
  Jet tr = Jet::constant(ms.sp, ms.order, 0.0);
  for (int a = 0; a < n; ++a) tr += rs.Pmix.at({a, a});
  double p_real = tr.value();
  double p_round = std::round(p_real);
  if (std::abs(p_real - p_round) > tol || p_round < -0.5 || p_round > n + 0.5) {
    std::ostringstream os;
    os << "projector trace " << p_real << " is not an integer in [0, " << n
       << "]: S is not a square root within tolerance";
    throw Error(os.str());
  }
  rs.p = static_cast<int>(p_round);
  return rs;
}

RootCheckReport check_square_root(const MetricField& g, const RootField& S,
                                  std::span<const Point> pts, double tol) {
  RootCheckReport rep;
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 0);
    JTensor cand = S.candidate(ms, nullptr);
    // symmetry is a precondition, not part of the residual
    double scale = 0.0;
    for (const auto& j : cand.a) scale = std::max(scale, std::abs(j.value()));
    for (int i = 0; i < ms.n; ++i)
      for (int j = i + 1; j < ms.n; ++j)
        if (std::abs(cand.at({i, j}).value() - cand.at({j, i}).value()) >
            1e-10 * std::max(1.0, scale))
          throw Error("square root candidate is not symmetric");
    double r = root_residual(ms, cand);
    if (r >= rep.max_residual) {
      rep.max_residual = r;
      rep.worst_point = x;
    }
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

ProjectorRanks projector_ranks(const RootStructure& rs) {
  const int n = rs.n;
  std::vector<double> pm(static_cast<std::size_t>(n) * n), qm(pm);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      pm[static_cast<std::size_t>(i) * n + j] = rs.Pmix.at({i, j}).value();
      qm[static_cast<std::size_t>(i) * n + j] = rs.Pimix.at({i, j}).value();
    }
  return {rs.p, numerical_rank(pm, n, n), numerical_rank(qm, n, n)};
}

JTensor superenergy_tensor(const SimpleFormSpec& form, const MetricStructure& ms) {
  JPForm omega = form.eval(ms.x, ms.order);
  Jet s2 = form_dot(omega, omega, ms.ginv);
  if (std::abs(s2.value()) <= 1e-12)
    throw Error("form is null (Omega.Omega = 0): unnormalizable");
  auto t = superenergy(omega, ms.g, ms.ginv);
  JTensor out(ms.n, {-1, -1}, ms.sp, ms.order);
  out.a = std::move(t);
  return out;
}

FormFromRoot form_from_root(const MetricStructure& ms, const RootStructure& rs) {
  const int n = ms.n;
  const int p = rs.p;
  if (p == 0) throw Error("the +1 eigenspace is trivial (p = 0): no generating form");
  // candidate spanning set: images of the coordinate basis under P^a_b
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cols[j][i] = rs.Pmix.at({i, j}).value();
  // greedy column pivoting with Euclidean orthogonalization
  std::vector<std::vector<double>> basis;
  std::vector<std::vector<double>> ortho;
  double colscale = 0.0;
  for (const auto& c : cols)
    for (double v : c) colscale = std::max(colscale, std::abs(v));
  for (int step = 0; step < p; ++step) {
    int best = -1;
    double best_norm = 0.0;
    std::vector<double> best_res;
    for (int j = 0; j < n; ++j) {
      std::vector<double> r = cols[j];
      for (const auto& u : ortho) {
        double d = 0.0;
        for (int i = 0; i < n; ++i) d += u[i] * r[i];
        for (int i = 0; i < n; ++i) r[i] -= d * u[i];
      }
      double norm = 0.0;
      for (double v : r) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > best_norm) {
        best_norm = norm;
        best = j;
        best_res = r;
      }
    }
    if (best < 0 || best_norm <= 1e-8 * std::max(1.0, colscale))
      throw Error("rank of the +1 eigenspace is deficient: inconsistent with trace p");
    basis.push_back(cols[best]);
    for (auto& v : best_res) v /= best_norm;
    ortho.push_back(best_res);
  }
  FormFromRoot out;
  // lower the basis vectors into factor 1-forms
  for (const auto& v : basis) {
    std::vector<double> k(n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) k[a] += ms.g_at(a, b).value() * v[b];
    out.factors.push_back(std::move(k));
  }
  // rebuild: wedge, normalize, superenergy, compare against S up to sign
  PForm sigma = wedge_of_factors(out.factors, n);
  std::vector<double> gi(static_cast<std::size_t>(n) * n), gv(gi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gi[static_cast<std::size_t>(i) * n + j] = ms.ginv_at(i, j).value();
      gv[static_cast<std::size_t>(i) * n + j] = ms.g_at(i, j).value();
    }
  double s2 = form_dot(sigma, sigma, gi);
  if (std::abs(s2) <= 1e-12) throw Error("extracted eigenbasis wedge is null");
  double lambda = std::sqrt(2.0 * factorial(p) / std::abs(s2));
  for (auto& c : sigma.comp) c *= lambda;
  auto t = superenergy(sigma, gv, gi);
  double rp = 0.0, rm = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double sv = rs.S.at({i, j}).value();
      double tv = t[static_cast<std::size_t>(i) * n + j];
      rp = std::max(rp, std::abs(tv - sv));
      rm = std::max(rm, std::abs(tv + sv));
      scale = std::max(scale, std::abs(sv));
    }
  out.sign = rp <= rm ? +1 : -1;
  out.roundtrip_residual = std::min(rp, rm) / std::max(1.0, scale);
  return out;
}

}  // namespace bicon
