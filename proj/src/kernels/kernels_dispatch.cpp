// Copyright 2026 The Tripsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <string>

#include "tripsynth/error.hpp"
#include "tripsynth/kernels.hpp"

namespace tripsynth::kernels {

#ifdef TRIPSYNTH_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

namespace {

Backend g_backend = Backend::kScalar;
bool g_resolved = false;

bool cpu_has_avx2() {
#if defined(TRIPSYNTH_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend resolve_from_env() {
  const char* env = std::getenv("TRIPSYNTH_KERNELS");
  std::string want = env == nullptr ? "auto" : env;
  if (want == "scalar") return Backend::kScalar;
  if (want == "avx2") {
    if (!cpu_has_avx2()) {
      throw ValueError(
          "TRIPSYNTH_KERNELS=avx2 requested but AVX2 is unavailable");
    }
    return Backend::kAvx2;
  }
  if (want == "auto" || want.empty()) {
    return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
  }
  throw ValueError("unknown TRIPSYNTH_KERNELS value: " + want);
}

Backend resolved() {
  if (!g_resolved) {
    g_backend = resolve_from_env();
    g_resolved = true;
  }
  return g_backend;
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

Backend active_backend() { return resolved(); }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !cpu_has_avx2()) {
    throw ValueError("AVX2 backend unavailable on this host");
  }
  g_backend = b;
  g_resolved = true;
}

const KernelTable& table() {
#ifdef TRIPSYNTH_HAVE_AVX2
  if (resolved() == Backend::kAvx2) return kAvx2Table;
#else
  (void)resolved();
#endif
  return kScalarTable;
}

}  // namespace tripsynth::kernels
