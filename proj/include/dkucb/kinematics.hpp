#pragma once

#include <span>

#include "dkucb/geometry.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/types.hpp"

namespace dkucb {

struct BaseStation {
  ArmId id = 0;
  Vec2 position;
};

/// Context of a vehicle with respect to one base station: orientation and
/// length of the BS->vehicle vector, Doppler spread from the tangential speed
/// component, and the remembered transmission count.
Context extract_context(Vec2 position, Vec2 velocity, const BaseStation& bs, int n_tx,
                        double wavelength);

/// Vehicle location implied by a context, given its base station position.
Vec2 context_location(const Context& x, Vec2 bs_position);

}  // namespace dkucb
