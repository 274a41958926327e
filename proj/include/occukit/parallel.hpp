// Copyright 2026 The OccuKit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace occukit {

/// Worker count for internal loops. Reads OCCUKIT_THREADS on every call
/// (1 = single-threaded reference mode); defaults to hardware concurrency.
std::size_t thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Every index is
/// visited exactly once; callers must write only to per-index outputs so the
/// result does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace occukit
