#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wbergman/geometry.hpp"

namespace wbergman {

/// Parametric description t -> z(t), t in [t_min, t_max], of the zero set E.
struct ZeroSetCurve {
  std::function<Complex(double)> point;
  double t_min = 0.0;
  double t_max = 1.0;
  bool closed = false;
};

/// A nonnegative strictly plurisubharmonic weight phi in one complex variable.
///
/// `complex_hessian` is phi_{z zbar} = (Laplacian phi) / 4, and `delta` is a lower
/// bound for it on the domain the weight was built for.
struct Weight {
  std::string name;
  std::function<double(Complex)> eval;
  std::function<std::array<double, 2>(Complex)> grad;
  std::function<double(Complex)> complex_hessian;
  double delta = 0.0;
  std::optional<ZeroSetCurve> zero_set_param;

  double operator()(Complex z) const { return eval(z); }
};

enum class WeightModel { flat_line, circle, scaled_line, log_growth };

/// Model parameters by name: circle {"radius"}, scaled_line {"c"}, log_growth {"m"}.
using WeightParams = std::map<std::string, double>;

std::string_view to_string(WeightModel model);
std::optional<WeightModel> parse_weight_model(std::string_view name);
std::vector<std::string> list_weight_models();

/// Closed-form model weights; `domain` fixes delta and clips the zero-set curve.
///   flat_line    phi = (Im z)^2                     delta = 1/2
///   scaled_line  phi = c (Im z)^2                   delta = c/2
///   circle       phi = (|z| - r)^2                  delta = 1 - r / (2 dist(0, domain))
///   log_growth   phi = (Im z)^2 s(|z|) + m log(1 + |z|^2) (1 - s(|z|)),
///                s the quintic smoothstep from 1 at |z| = 1.5 to 0 at |z| = 2.5;
///                delta is the minimum of the Hessian on a dense grid of the domain.
/// Throws DomainError on invalid parameters or when the Hessian is not bounded away
/// from zero on the domain.
Weight make_model_weight(WeightModel model, const WeightParams& params, const Rect& domain);

struct PshReport {
  double min_eig = 0.0;
  bool ok = false;
  Complex worst_node{};
  /// Largest |FD Laplacian / 4 - complex_hessian| / max(|complex_hessian|, 1e-300) over nodes.
  double fd_max_rel_error = 0.0;
  bool fd_ok = false;
};

/// Checks complex_hessian >= required_delta at every node, and cross-checks the analytic
/// Hessian against the 5-point Laplacian with step equal to the grid spacing (rel. tol 1e-4).
PshReport verify_plurisubharmonic(const Weight& w, const Quadrature& q, double required_delta);

struct RescaledWeight {
  Weight weight;
  double scale = 1.0;
};

/// phi' = (5 / delta) phi, so that the Hessian bound becomes exactly 5. Same zero set.
RescaledWeight rescale_for_agmon(const Weight& w);

/// psi(t) = t for t >= 1, t^2/2 + 1/2 below. Convex, C^1, psi(t) >= t.
double psi(double t);
double psi_derivative(double t);

/// chi_k(z) = psi(sqrt(k) |z - a|).
double chi_k(Complex z, Complex a, double k);

struct AgmonWeight {
  Complex center{};
  double k = 1.0;

  double operator()(Complex z) const { return chi_k(z, center, k); }
};

/// Quintic smoothstep S(s) = 6s^5 - 15s^4 + 10s^3 clamped to [0, 1]; and its derivative.
double smoothstep5(double s);
double smoothstep5_derivative(double s);

}  // namespace wbergman
