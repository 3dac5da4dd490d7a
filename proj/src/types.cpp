#include "driftsim/types.hpp"

namespace driftsim {

AxleLoads static_axle_loads(const VehicleParams& p) {
  const double wheelbase = p.a + p.b;
  return {p.m * p.g * p.b / wheelbase, p.m * p.g * p.a / wheelbase};
}

void validate(const VehicleParams& p) {
  if (p.m <= 0.0 || p.i_z <= 0.0 || p.a <= 0.0 || p.b <= 0.0 || p.r <= 0.0 ||
      p.mu <= 0.0 || p.g <= 0.0) {
    throw std::invalid_argument("vehicle parameters must be strictly positive");
  }
}

void validate(const TireParams& t) {
  if (t.b_stiff == 0.0) {
    throw std::invalid_argument("tire stiffness factor must be nonzero");
  }
  if (t.c_shape <= 1.0) {
    throw std::invalid_argument("tire shape factor must exceed 1");
  }
}

}  // namespace driftsim
