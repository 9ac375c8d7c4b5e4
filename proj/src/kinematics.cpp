#include "dkucb/kinematics.hpp"

#include <cmath>

namespace dkucb {

Context extract_context(Vec2 position, Vec2 velocity, const BaseStation& bs, int n_tx,
                        double wavelength) {
  const Vec2 rel = position - bs.position;
  const double dist = norm(rel);
  const double theta = dist > 0.0 ? std::atan2(rel.y, rel.x) : 0.0;
  // tangential speed |v x u| with u the unit BS->vehicle vector
  const double tangential = dist > 0.0 ? std::fabs(cross(velocity, rel)) / dist : norm(velocity);
  return make_context(bs.id, theta, dist, tangential / wavelength, n_tx);
}

Vec2 context_location(const Context& x, Vec2 bs_position) {
  return bs_position + Vec2{std::cos(x.theta), std::sin(x.theta)} * x.dist;
}

}  // namespace dkucb
