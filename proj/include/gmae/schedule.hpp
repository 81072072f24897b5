// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace gmae {

// Linear warmup from 0 to base_lr over warmup_steps, then half-cosine decay
// to 0 at total_steps.  lr(0) = 0 when warmup_steps > 0; steps at or past
// total_steps return 0.
double lr_schedule(long step, double base_lr, long warmup_steps,
                   long total_steps);

}  // namespace gmae
