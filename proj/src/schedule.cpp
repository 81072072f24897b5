// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include "gmae/schedule.hpp"

#include <cmath>

#include "gmae/types.hpp"

namespace gmae {

double lr_schedule(long step, double base_lr, long warmup_steps,
                   long total_steps) {
  if (step < 0 || warmup_steps < 0 || total_steps < 1 || !(base_lr >= 0.0)) {
    throw Error("lr_schedule: invalid arguments");
  }
  if (warmup_steps > total_steps) {
    throw Error("lr_schedule: warmup exceeds total steps");
  }
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step) / warmup_steps;
  }
  if (step >= total_steps) return 0.0;
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

}  // namespace gmae
