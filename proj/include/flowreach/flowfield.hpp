#ifndef FLOWREACH_FLOWFIELD_HPP
#define FLOWREACH_FLOWFIELD_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowreach/grid.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

/// Serializable identity of a velocity field: builtin name plus parameters.
struct FieldDescriptor {
  std::string name;
  nlohmann::ordered_json params;
  int dimension = 0;

  nlohmann::ordered_json to_json() const;
};

/// Evaluatable ambient velocity field V: R^d -> R^d with declared metadata.
/// Evaluation is pure and safe to call concurrently.
class VectorField {
 public:
  using Evaluator = std::function<VecN(const VecN&)>;

  VectorField(int dim, Evaluator eval, FieldDescriptor desc)
      : dim_(dim), eval_(std::move(eval)), desc_(std::move(desc)) {}

  int dim() const { return dim_; }
  VecN operator()(const VecN& x) const { return eval_(x); }

  const FieldDescriptor& descriptor() const { return desc_; }

  /// Declared bound M with sampled ||V(x)|| <= M everywhere, when known.
  std::optional<double> sup_bound() const { return sup_bound_; }
  /// Declared bound on max_i sup |V_i|, when known. Used for time steps.
  std::optional<double> component_sup_bound() const { return component_sup_bound_; }
  /// Per-axis period lengths; 0 marks an axis the field does not depend on.
  std::optional<VecN> period() const { return period_; }
  /// Smallest length scale over which the field varies appreciably.
  double feature_scale() const { return feature_scale_; }

  VectorField& with_sup_bound(double m) {
    sup_bound_ = m;
    return *this;
  }
  VectorField& with_component_sup_bound(double m) {
    component_sup_bound_ = m;
    return *this;
  }
  VectorField& with_period(const VecN& p) {
    period_ = p;
    return *this;
  }
  VectorField& with_feature_scale(double s) {
    feature_scale_ = s;
    return *this;
  }

 private:
  int dim_;
  Evaluator eval_;
  FieldDescriptor desc_;
  std::optional<double> sup_bound_;
  std::optional<double> component_sup_bound_;
  std::optional<VecN> period_;
  double feature_scale_ = 1.0;
};

/// Builds one of the builtin fields:
///   constant        {"v": [..]}
///   shear           {"amplitude": a, "wavevector": [..]}    plane wave, velocity normal to k
///   cellular        {"amplitude": a, "cell": l}             vortex lattice from a product stream function
///   mollified_sign  {"amplitude": a, "rho": r}              a*(s(x2), s(x1)) with s a mollified sign
///   stream_random   {"seed": u, "modes": m, "amplitude": a} seeded superposition of stream-function waves
/// Every builtin except `constant` is built from a stream function (d=2) or a
/// wave with velocity orthogonal to the wavevector (d=3), so its divergence
/// vanishes identically. Throws std::invalid_argument on unknown names or
/// non-positive amplitude/cell/rho.
VectorField make_builtin(const std::string& name, const nlohmann::json& params);

/// Round-trips {"name":..., "params":..., "dimension":...} documents.
VectorField field_from_descriptor(const nlohmann::json& descriptor);

/// Field y -> V(y - offset).
VectorField translate(const VectorField& field, const VecN& offset);

/// Mollified sign profile used by mollified_sign: the convolution of sign
/// with the standard unit-mass bump kernel scaled to radius rho. Exposed for
/// tests; equals +-1 exactly for |t| >= rho.
double mollified_sign_profile(double t, double rho);

/// max over grid nodes of |sum_i (V_i(x + s e_i) - V_i(x - s e_i)) / (2 s)|.
double divergence_residual(const VectorField& field, const Grid& grid, double fd_step);

/// Max of ||V|| over deterministic low-discrepancy samples of the region;
/// a lower bound on the true sup.
double sup_norm_estimate(const VectorField& field, const Box& region, std::int64_t n_samples);

/// Tensor lattice of cube centers, inclusive of both ends on each axis.
struct CenterLattice {
  VecN lo;
  VecN hi;
  double step = 1.0;

  std::vector<VecN> centers() const;
};

struct DriftEntry {
  double edge_length = 0.0;
  double drift = 0.0;
};

/// Measured mean-drift profile: for each cube edge length L, the max over
/// lattice centers of the norm of the cube-averaged field. The lattice and
/// quadrature resolution are recorded so runs are reproducible; the sup over
/// all centers is approximated by this finite lattice.
struct DriftProfile {
  std::vector<DriftEntry> entries;
  CenterLattice lattice;
  int quad_res = 0;        ///< quadrature points per axis per unit length
  bool underresolved = false;  ///< fewer than 4 points per field feature length

  nlohmann::ordered_json to_json() const;
};

/// Cube averages by tensor-product midpoint quadrature at every lattice
/// center; cubes are centered: [c - L/2, c + L/2]^d.
DriftProfile mean_drift_profile(const VectorField& field, std::span<const double> edge_lengths,
                                const CenterLattice& lattice, int quad_res);

}  // namespace flowreach

#endif  // FLOWREACH_FLOWFIELD_HPP
