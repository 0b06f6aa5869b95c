// Copyright 2026 The dnehb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dnehb/cournot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>

#include "dnehb/errors.hpp"
#include "dnehb/rng.hpp"

namespace dnehb {

namespace {

std::vector<std::size_t> firm_dims(const std::vector<CournotFirm>& firms) {
  std::vector<std::size_t> dims;
  dims.reserve(firms.size());
  for (const auto& f : firms) dims.push_back(f.markets.size());
  return dims;
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

CournotInstance::CournotInstance(std::size_t markets, std::vector<CournotFirm> firms,
                                 Vector price_intercepts, Vector price_slopes)
    : markets_(markets),
      firms_(std::move(firms)),
      price_intercepts_(std::move(price_intercepts)),
      price_slopes_(std::move(price_slopes)),
      layout_(firm_dims(firms_)) {
  if (firms_.empty()) throw InputError("Cournot game needs at least one firm");
  if (markets_ == 0) throw InputError("Cournot game needs at least one market");
  const auto nm = static_cast<Eigen::Index>(markets_);
  if (price_intercepts_.size() != nm || price_slopes_.size() != nm) {
    throw InputError("price intercepts and slopes need one entry per market");
  }
  for (Eigen::Index h = 0; h < nm; ++h) {
    if (!(price_intercepts_(h) >= 0.0)) throw InputError("price intercepts must be nonnegative");
    if (!(price_slopes_(h) >= 0.0)) throw InputError("price slopes must be nonnegative");
  }
  for (std::size_t i = 0; i < firms_.size(); ++i) {
    const CournotFirm& f = firms_[i];
    const std::string who = "firm " + std::to_string(i) + ": ";
    const auto ni = static_cast<Eigen::Index>(f.markets.size());
    if (ni == 0) throw InputError(who + "no production variables");
    if (f.Q.rows() != ni || f.Q.cols() != ni || f.q.size() != ni) {
      throw InputError(who + "Q_i / q_i dimensions do not match the market list");
    }
    for (std::size_t h : f.markets) {
      if (h >= markets_) throw InputError(who + "market index out of range");
    }
    if ((f.Q - f.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, f.Q.cwiseAbs().maxCoeff())) {
      throw InputError(who + "Q_i is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f.Q, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues()(0) > 0.0)) throw InputError(who + "Q_i is not positive definite");
    for (std::size_t h : f.markets) var_market_.push_back(h);
  }
}

void CournotInstance::gradient(std::size_t i, std::span<const double> x,
                               std::span<double> grad) const {
  if (i >= firms()) throw InputError("firm index out of range");
  if (x.size() != dimension()) throw InputError("joint action has the wrong length");
  const CournotFirm& f = firms_[i];
  const std::size_t ni = f.markets.size();
  if (grad.size() != ni) throw InputError("gradient buffer has the wrong length");

  // Total supply per market, and firm i's own share of it.
  Eigen::VectorXd supply = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(markets_));
  for (std::size_t a = 0; a < x.size(); ++a) supply(static_cast<Eigen::Index>(var_market_[a])) += x[a];
  Eigen::VectorXd own = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(markets_));
  const std::size_t off = layout_.offset(i);
  for (std::size_t a = 0; a < ni; ++a) own(static_cast<Eigen::Index>(f.markets[a])) += x[off + a];

  Eigen::Map<const Eigen::VectorXd> xi(x.data() + off, static_cast<Eigen::Index>(ni));
  Eigen::Map<Eigen::VectorXd> g(grad.data(), static_cast<Eigen::Index>(ni));
  g.noalias() = 2.0 * f.Q * xi + f.q;
  for (std::size_t a = 0; a < ni; ++a) {
    const auto h = static_cast<Eigen::Index>(f.markets[a]);
    const double price = price_intercepts_(h) - price_slopes_(h) * supply(h);
    g(static_cast<Eigen::Index>(a)) += -price + price_slopes_(h) * own(h);
  }
}

double CournotInstance::cost(std::size_t i, const Vector& x) const {
  if (i >= firms()) throw InputError("firm index out of range");
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw InputError("joint action has the wrong length");
  }
  const CournotFirm& f = firms_[i];
  Eigen::VectorXd supply = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(markets_));
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    supply(static_cast<Eigen::Index>(var_market_[static_cast<std::size_t>(a)])) += x(a);
  }
  const auto off = static_cast<Eigen::Index>(layout_.offset(i));
  const auto ni = static_cast<Eigen::Index>(f.markets.size());
  const Vector xi = x.segment(off, ni);
  double revenue = 0.0;
  for (Eigen::Index a = 0; a < ni; ++a) {
    const auto h = static_cast<Eigen::Index>(f.markets[static_cast<std::size_t>(a)]);
    revenue += (price_intercepts_(h) - price_slopes_(h) * supply(h)) * xi(a);
  }
  return xi.dot(f.Q * xi) + f.q.dot(xi) - revenue;
}

AffineMap cournot_affine_map(const CournotInstance& inst) {
  const auto n = static_cast<Eigen::Index>(inst.dimension());
  const auto nm = static_cast<Eigen::Index>(inst.markets());
  // B maps production variables to markets.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nm, n);
  Vector q(n);
  for (std::size_t i = 0; i < inst.firms(); ++i) {
    const CournotFirm& f = inst.firm(i);
    const auto off = static_cast<Eigen::Index>(inst.layout().offset(i));
    for (std::size_t a = 0; a < f.markets.size(); ++a) {
      B(static_cast<Eigen::Index>(f.markets[a]), off + static_cast<Eigen::Index>(a)) = 1.0;
    }
    q.segment(off, f.q.size()) = f.q;
  }
  const Eigen::MatrixXd xi_b = inst.price_slopes().asDiagonal() * B;
  AffineMap map;
  map.Lambda = B.transpose() * xi_b;
  for (std::size_t i = 0; i < inst.firms(); ++i) {
    const CournotFirm& f = inst.firm(i);
    const auto off = static_cast<Eigen::Index>(inst.layout().offset(i));
    const auto ni = static_cast<Eigen::Index>(f.markets.size());
    map.Lambda.block(off, off, ni, ni) +=
        2.0 * f.Q + B.middleCols(off, ni).transpose() * xi_b.middleCols(off, ni);
  }
  map.b = q - B.transpose() * inst.price_intercepts();
  return map;
}

Vector cournot_gradient(const CournotInstance& inst, std::size_t i, const Vector& x) {
  if (i >= inst.firms()) throw InputError("firm index out of range");
  Vector g(static_cast<Eigen::Index>(inst.layout().dim(i)));
  inst.gradient(i, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  return g;
}

GameConstants cournot_constants(const CournotInstance& inst) {
  const AffineMap map = cournot_affine_map(inst);
  const Eigen::MatrixXd sym = 0.5 * (map.Lambda + map.Lambda.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);

  GameConstants c;
  c.mu = eig.eigenvalues()(0);
  if (!(c.mu > 0.0)) {
    throw ComputationError("Cournot game mapping is not strongly monotone (mu = " +
                           std::to_string(c.mu) + ")");
  }
  const BlockLayout& layout = inst.layout();
  const auto n = static_cast<Eigen::Index>(layout.total());
  for (std::size_t i = 0; i < inst.firms(); ++i) {
    const auto off = static_cast<Eigen::Index>(layout.offset(i));
    const auto ni = static_cast<Eigen::Index>(layout.dim(i));
    c.own_lipschitz.push_back(spectral_norm(map.Lambda.block(off, off, ni, ni)));
    Eigen::MatrixXd cross(ni, n - ni);
    cross << map.Lambda.block(off, 0, ni, off), map.Lambda.block(off, off + ni, ni, n - off - ni);
    c.cross_lipschitz.push_back(spectral_norm(cross));
  }
  return c;
}

Vector solve_ne(const CournotInstance& inst) {
  const AffineMap map = cournot_affine_map(inst);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(map.Lambda);
  const double scale = map.Lambda.cwiseAbs().maxCoeff();
  if (!(std::abs(lu.determinant()) > 0.0) || !(lu.rcond() > 1e-14) || !(scale > 0.0)) {
    throw ComputationError("Cournot game mapping is singular; no unique NE");
  }
  Vector x = lu.solve(-map.b);
  // One refinement step keeps the residual at the 1e-10 relative target.
  Vector r = map.Lambda * x + map.b;
  x -= lu.solve(r);
  return x;
}

GameInstance make_game(const CournotInstance& inst) {
  auto shared = std::make_shared<const CournotInstance>(inst);
  GradientOracle oracle = [shared](std::size_t i, std::span<const double> x,
                                   std::span<double> grad) { shared->gradient(i, x, grad); };
  return GameInstance(inst.layout().dims(), std::move(oracle), cournot_constants(inst));
}

CournotInstance sample_cournot(const CournotSampling& spec, std::uint64_t seed) {
  const std::size_t m = spec.firms;
  const std::size_t nm = spec.markets;
  if (m == 0 || nm == 0) throw InputError("need at least one firm and one market");
  if (spec.dimension < m || spec.dimension > m * nm) {
    throw InputError("total dimension must lie in [m, m*N]");
  }
  Rng rng(seed, streams::kInstance);

  std::vector<std::size_t> dims(m, 1);
  for (std::size_t extra = spec.dimension - m; extra > 0; --extra) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < m; ++i) {
      if (dims[i] < nm) open.push_back(i);
    }
    ++dims[open[rng.index(open.size())]];
  }

  std::vector<CournotFirm> firms(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::size_t> pool(nm);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t a = 0; a < dims[i]; ++a) {
      std::size_t j = a + rng.index(nm - a);
      std::swap(pool[a], pool[j]);
    }
    firms[i].markets.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(dims[i]));
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto ni = static_cast<Eigen::Index>(dims[i]);
    firms[i].Q = Eigen::MatrixXd::Zero(ni, ni);
    for (Eigen::Index a = 0; a < ni; ++a) firms[i].Q(a, a) = rng.uniform(spec.q_diag_lo, spec.q_diag_hi);
    firms[i].q.resize(ni);
    for (Eigen::Index a = 0; a < ni; ++a) firms[i].q(a) = rng.uniform(spec.q_lin_lo, spec.q_lin_hi);
  }
  Vector intercepts(static_cast<Eigen::Index>(nm));
  for (Eigen::Index h = 0; h < intercepts.size(); ++h) {
    intercepts(h) = rng.uniform(spec.intercept_lo, spec.intercept_hi);
  }
  Vector slopes(static_cast<Eigen::Index>(nm));
  for (Eigen::Index h = 0; h < slopes.size(); ++h) slopes(h) = rng.uniform(spec.slope_lo, spec.slope_hi);
  return CournotInstance(nm, std::move(firms), std::move(intercepts), std::move(slopes));
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool is_diagonal(const Eigen::MatrixXd& q) {
  return (q - Eigen::MatrixXd(q.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

nlohmann::json to_json(const CournotInstance& inst) {
  nlohmann::json doc;
  doc["m"] = inst.firms();
  doc["N"] = inst.markets();
  bool diagonal = true;
  for (std::size_t i = 0; i < inst.firms(); ++i) diagonal = diagonal && is_diagonal(inst.firm(i).Q);
  auto markets = nlohmann::json::array();
  auto qmat = nlohmann::json::array();
  auto qlin = nlohmann::json::array();
  for (std::size_t i = 0; i < inst.firms(); ++i) {
    const CournotFirm& f = inst.firm(i);
    markets.push_back(f.markets);
    if (diagonal) {
      qmat.push_back(to_std(f.Q.diagonal()));
    } else {
      auto rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < f.Q.rows(); ++r) rows.push_back(to_std(f.Q.row(r).transpose()));
      qmat.push_back(rows);
    }
    qlin.push_back(to_std(f.q));
  }
  doc["markets"] = markets;
  doc[diagonal ? "Q_diag" : "Q"] = qmat;
  doc["q"] = qlin;
  doc["P_bar"] = to_std(inst.price_intercepts());
  doc["chi"] = to_std(inst.price_slopes());
  return doc;
}

CournotInstance cournot_from_json(const nlohmann::json& doc) {
  try {
    const auto m = doc.at("m").get<std::size_t>();
    const auto nm = doc.at("N").get<std::size_t>();
    const auto& markets = doc.at("markets");
    const auto& qlin = doc.at("q");
    if (markets.size() != m || qlin.size() != m) {
      throw InputError("Cournot document: per-firm lists must have m entries");
    }
    std::vector<CournotFirm> firms(m);
    for (std::size_t i = 0; i < m; ++i) {
      firms[i].markets = markets.at(i).get<std::vector<std::size_t>>();
      firms[i].q = from_std(qlin.at(i).get<std::vector<double>>());
      const auto ni = static_cast<Eigen::Index>(firms[i].markets.size());
      if (doc.contains("Q_diag")) {
        Vector d = from_std(doc.at("Q_diag").at(i).get<std::vector<double>>());
        if (d.size() != ni) throw InputError("Cournot document: Q_diag length mismatch");
        firms[i].Q = d.asDiagonal();
      } else {
        const auto rows = doc.at("Q").at(i).get<std::vector<std::vector<double>>>();
        firms[i].Q.resize(ni, ni);
        if (static_cast<Eigen::Index>(rows.size()) != ni) {
          throw InputError("Cournot document: Q row count mismatch");
        }
        for (Eigen::Index r = 0; r < ni; ++r) {
          if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != ni) {
            throw InputError("Cournot document: Q column count mismatch");
          }
          for (Eigen::Index c = 0; c < ni; ++c) {
            firms[i].Q(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
          }
        }
      }
    }
    return CournotInstance(nm, std::move(firms), from_std(doc.at("P_bar").get<std::vector<double>>()),
                           from_std(doc.at("chi").get<std::vector<double>>()));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("Cournot document: ") + e.what());
  }
}

void save_cournot(const CournotInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(inst).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

CournotInstance load_cournot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse " + path.string() + ": " + e.what());
  }
  return cournot_from_json(doc);
}

}  // namespace dnehb
