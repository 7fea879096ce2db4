#include "fppm/frame.hpp"

namespace fppm {

TangentFrame build_tangent_frame(const Normal3 &n) {
  const double sign = std::copysign(1.0, n.z);
  const double a = -1.0 / (sign + n.z);
  const double b = n.x * n.y * a;
  TangentFrame f;
  f.u = {1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x};
  f.v = {b, sign + n.y * n.y * a, -n.y};
  f.n = n;
  return f;
}

} // namespace fppm
