#pragma once

#include <cstdint>

namespace dkucb {

using ArmId = int;               // base station index
using VehicleId = std::int64_t;
using Period = std::int64_t;

}  // namespace dkucb
