// uase/parallel.h
//
// Copyright 2026  uase authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#ifndef UASE_PARALLEL_H_
#define UASE_PARALLEL_H_

#include <functional>

namespace uase {

// The hot loops (per-sample gradients, embedding extraction, trial scoring)
// are data-parallel over independent items; each item writes to its own slot
// and reductions happen serially in item order afterwards, so results are
// identical for any thread count.  parallel=false is the serial reference
// path the tests compare against.

void ParallelFor(int n, const std::function<void(int)> &body,
                 bool parallel = true);

int MaxThreads();

}  // namespace uase

#endif  // UASE_PARALLEL_H_
