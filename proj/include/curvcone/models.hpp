#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvcone/cones.hpp"
#include "curvcone/curvature_ops.hpp"
#include "curvcone/rng.hpp"

namespace curvcone {

/// Constant-curvature fixture: r times the identity on Lambda^2 R^n.
inline CurvatureOperator sphere_operator(int n, double r) {
  const int fiber = n * (n - 1) / 2;
  return CurvatureOperator(n, r * Eigen::MatrixXd::Identity(fiber, fiber));
}

/// Diagonal operator with spectrum (-1, 1, ..., 1): the canonical witness
/// that 2-nonnegativity does not imply membership in every cone of the
/// interpolating family (it sits on the boundary at (1, 0) and is rejected
/// at (3/4, 1/2)).
inline CurvatureOperator two_nonneg_witness(int n) {
  if (n < 3) throw std::invalid_argument("two_nonneg_witness: n >= 3 required");
  const int fiber = n * (n - 1) / 2;
  Eigen::VectorXd mu = Eigen::VectorXd::Ones(fiber);
  mu(0) = -1.0;
  return CurvatureOperator(n, Eigen::MatrixXd(mu.asDiagonal()));
}

/// In-cone draw with fully known eigenstructure: sorted spectrum plus the
/// orthogonal frame used to conjugate it.
struct InConeDraw {
  CurvatureOperator op;
  Eigen::VectorXd spectrum;  // ascending
  Eigen::MatrixXd frame;     // column a is the eigenvector of spectrum(a)
};

/// Whether the boundary sampler below can produce nondegenerate draws on the
/// requested facet. C2 draws exist for every parameter pair in the region.
/// C1 draws (C1 = 0, C2 >= 0, mu_1 <= 0 <= mu_2) require
/// (lambda1+lambda2)^2 <= 1; inside the region that forces lambda1+lambda2 = 1,
/// and for lambda2 > 0 additionally mu_2 = mu_3, a degenerate spectrum. So
/// the C1 facet is samplable only at the corner (1, 0).
inline bool boundary_draw_feasible(const ConeParams& params, Binding which) {
  if (which == Binding::C2) return true;
  return params.lambda2 <= 1e-12 && std::abs(params.lambda1 - 1.0) <= 1e-12;
}

/// Draws an operator in the cone of `params`: an interior point, or a point
/// on the selected boundary facet (that functional equal to zero, the other
/// >= 0, and mu_1 <= 0 <= mu_2). The spectrum above mu_1 comes from sorted
/// |N(0,1)| draws; mu_1 is solved from the binding constraint (boundary) or
/// drawn uniformly between the membership bound and mu_2 (interior). The
/// diagonal is conjugated by a Haar orthogonal frame on the fiber.
///
/// Throws std::runtime_error after `max_retries` rejections, which signals an
/// infeasible boundary request (see boundary_draw_feasible).
inline InConeDraw random_in_cone(const ConeParams& params, int n, std::uint64_t seed,
                                 std::optional<Binding> boundary = std::nullopt,
                                 int max_retries = 1000) {
  require_lambda_region(params);
  if (n < 3) throw std::invalid_argument("random_in_cone: n >= 3 required");
  const int fiber = n * (n - 1) / 2;
  const double l1 = params.lambda1;
  const double l2 = params.lambda2;
  const double w2 = params.c2_weight();
  Rng rng(seed);

  Eigen::VectorXd mu(fiber);
  bool accepted = false;
  for (int attempt = 0; attempt < max_retries && !accepted; ++attempt) {
    for (int a = 1; a < fiber; ++a) mu(a) = std::abs(rng.gaussian());
    std::sort(mu.data() + 1, mu.data() + fiber);
    if (!boundary) {
      const double lo = -(w2 / l1) * mu(1);
      mu(0) = lo + rng.uniform_pos() * (mu(1) - lo);
      accepted = true;
    } else if (*boundary == Binding::C1) {
      mu(0) = -l1 * mu(1) - l2 * mu(2);
      accepted = c2_functional(mu, l1, l2, 0, 1) >= -1e-12;
    } else {
      mu(0) = -(w2 / l1) * mu(1);
      accepted = c1_functional(mu, l1, l2, 0, 1, 2) >= -1e-12;
    }
  }
  if (!accepted)
    throw std::runtime_error(
        std::string("random_in_cone: rejection sampler exhausted on the ") +
        binding_name(*boundary) +
        " facet; the boundary request is infeasible for these parameters");

  InConeDraw draw;
  draw.spectrum = mu;
  draw.frame = haar_orthogonal(fiber, rng);
  draw.op = CurvatureOperator(
      n, draw.frame * mu.asDiagonal() * draw.frame.transpose());
  return draw;
}

/// Declarative description of a test fixture / experiment seed operator.
struct ModelSpec {
  enum class Kind { Identity, Diagonal, RandomSymmetric, RandomInCone, Witness, RankOne };

  Kind kind = Kind::Identity;
  int n = 3;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> spectrum;         // Diagonal
  std::optional<ConeParams> params;     // RandomInCone
  std::optional<Binding> boundary;      // RandomInCone

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::Identity: return "identity";
      case Kind::Diagonal: return "diagonal";
      case Kind::RandomSymmetric: return "random-symmetric";
      case Kind::RandomInCone: return "random-in-cone";
      case Kind::Witness: return "witness";
      case Kind::RankOne: return "rank-one";
    }
    return "?";
  }

  static Kind parse_kind(const std::string& s) {
    for (Kind k : {Kind::Identity, Kind::Diagonal, Kind::RandomSymmetric,
                   Kind::RandomInCone, Kind::Witness, Kind::RankOne})
      if (s == kind_name(k)) return k;
    throw std::invalid_argument("ModelSpec: unknown kind '" + s + "'");
  }

  /// Flat key-value lines, the CLI config format.
  std::vector<std::pair<std::string, std::string>> to_kv() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("model.kind", kind_name(kind));
    kv.emplace_back("model.n", std::to_string(n));
    kv.emplace_back("model.scale", format_double(scale));
    kv.emplace_back("model.seed", std::to_string(seed));
    if (!spectrum.empty()) {
      std::string s;
      for (std::size_t i = 0; i < spectrum.size(); ++i) {
        if (i) s += ",";
        s += format_double(spectrum[i]);
      }
      kv.emplace_back("model.spectrum", s);
    }
    if (params) {
      kv.emplace_back("model.lambda1", format_double(params->lambda1));
      kv.emplace_back("model.lambda2", format_double(params->lambda2));
    }
    if (boundary) kv.emplace_back("model.boundary", binding_name(*boundary));
    return kv;
  }

  static ModelSpec from_kv(const std::map<std::string, std::string>& kv) {
    ModelSpec spec;
    auto get = [&kv](const std::string& key) -> const std::string* {
      auto it = kv.find(key);
      return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("model.kind")) spec.kind = parse_kind(*v);
    if (const auto* v = get("model.n")) spec.n = std::stoi(*v);
    if (const auto* v = get("model.scale")) spec.scale = std::stod(*v);
    if (const auto* v = get("model.seed")) spec.seed = std::stoull(*v);
    if (const auto* v = get("model.spectrum")) {
      std::stringstream ss(*v);
      std::string tok;
      while (std::getline(ss, tok, ',')) spec.spectrum.push_back(std::stod(tok));
    }
    const auto* a = get("model.lambda1");
    const auto* b = get("model.lambda2");
    if (a && b) spec.params = ConeParams{std::stod(*a), std::stod(*b)};
    else if (a || b)
      throw std::invalid_argument("ModelSpec: lambda1/lambda2 must come together");
    if (const auto* v = get("model.boundary")) {
      if (*v == "C1") spec.boundary = Binding::C1;
      else if (*v == "C2") spec.boundary = Binding::C2;
      else throw std::invalid_argument("ModelSpec: boundary must be C1 or C2");
    }
    return spec;
  }

 private:
  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
};

inline CurvatureOperator build_model(const ModelSpec& spec) {
  const int fiber = spec.n * (spec.n - 1) / 2;
  switch (spec.kind) {
    case ModelSpec::Kind::Identity:
      return sphere_operator(spec.n, spec.scale);
    case ModelSpec::Kind::Diagonal: {
      if (static_cast<int>(spec.spectrum.size()) != fiber)
        throw std::invalid_argument("build_model: diagonal spectrum must have N entries");
      Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(
          spec.spectrum.data(), static_cast<Eigen::Index>(spec.spectrum.size()));
      return CurvatureOperator(spec.n, Eigen::MatrixXd(d.asDiagonal()) * spec.scale);
    }
    case ModelSpec::Kind::RandomSymmetric: {
      Rng rng(spec.seed);
      const Eigen::MatrixXd g = gaussian_matrix(fiber, fiber, rng);
      return CurvatureOperator(spec.n, spec.scale * (g + g.transpose()) / 2.0);
    }
    case ModelSpec::Kind::RandomInCone: {
      if (!spec.params)
        throw std::invalid_argument("build_model: random-in-cone needs lambda1/lambda2");
      InConeDraw draw = random_in_cone(*spec.params, spec.n, spec.seed, spec.boundary);
      if (spec.scale <= 0)
        throw std::invalid_argument("build_model: in-cone scale must be positive");
      return spec.scale * draw.op;
    }
    case ModelSpec::Kind::Witness:
      return spec.scale * two_nonneg_witness(spec.n);
    case ModelSpec::Kind::RankOne: {
      Rng rng(spec.seed);
      Eigen::VectorXd v(fiber);
      for (int i = 0; i < fiber; ++i) v(i) = rng.gaussian();
      v.normalize();
      return CurvatureOperator(spec.n, spec.scale * (v * v.transpose()));
    }
  }
  throw std::logic_error("build_model: unreachable");
}

}  // namespace curvcone
