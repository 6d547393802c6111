// uase/parallel.cc
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

#include "uase/parallel.h"

#include <omp.h>

namespace uase {

void ParallelFor(int n, const std::function<void(int)> &body, bool parallel) {
  if (!parallel) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) body(i);
}

int MaxThreads() { return omp_get_max_threads(); }

}  // namespace uase
