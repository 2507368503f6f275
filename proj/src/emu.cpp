// Copyright 2026 The Upcycle Simulator Authors
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

#include "emu.hpp"

#include <cassert>
#include <cstring>

namespace upcycle::emu {

namespace {

std::uint32_t f32_bits(float x) {
  std::uint32_t u;
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

float bits_f32(std::uint32_t u) {
  float x;
  std::memcpy(&x, &u, sizeof(x));
  return x;
}

}  // namespace

std::uint16_t f32_to_f16(float x) {
  std::uint32_t bits = f32_bits(x);
  std::uint16_t sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000u);
  std::uint32_t exp = (bits >> 23) & 0xffu;
  std::uint32_t man = bits & 0x7fffffu;
  if (exp == 0xffu) {
    // Inf stays inf; NaN keeps a payload bit so it stays NaN.
    return static_cast<std::uint16_t>(sign | 0x7c00u | (man ? 0x200u : 0));
  }
  int e = static_cast<int>(exp) - 127 + 15;
  if (e >= 31) return static_cast<std::uint16_t>(sign | 0x7c00u);
  if (e <= 0) {
    if (e < -10) return sign;  // underflows past the smallest subnormal
    man |= 0x800000u;
    int shift = 14 - e;
    std::uint32_t q = man >> shift;
    std::uint32_t rem = man & ((1u << shift) - 1);
    std::uint32_t half = 1u << (shift - 1);
    if (rem > half || (rem == half && (q & 1))) ++q;
    return static_cast<std::uint16_t>(sign | q);
  }
  std::uint16_t h =
      static_cast<std::uint16_t>(sign | (static_cast<std::uint32_t>(e) << 10) | (man >> 13));
  std::uint32_t rem = man & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (h & 1))) ++h;  // carry may bump the exponent
  return h;
}

float f16_to_f32(std::uint16_t h) {
  std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  std::uint32_t exp = (h >> 10) & 0x1fu;
  std::uint32_t man = h & 0x3ffu;
  if (exp == 0x1fu) return bits_f32(sign | 0x7f800000u | (man << 13));
  if (exp == 0) {
    if (man == 0) return bits_f32(sign);
    int e = 0;
    while (!(man & 0x400u)) {
      man <<= 1;
      ++e;
    }
    man &= 0x3ffu;
    return bits_f32(sign | (static_cast<std::uint32_t>(113 - e) << 23) | (man << 13));
  }
  return bits_f32(sign | ((exp + 112) << 23) | (man << 13));
}

std::int8_t requantize_shift(std::int32_t acc, int shift) {
  std::int64_t v = acc;
  if (shift > 0) v = (v + (std::int64_t{1} << (shift - 1))) >> shift;
  if (v > 127) v = 127;
  if (v < -128) v = -128;
  return static_cast<std::int8_t>(v);
}

TileMachine::TileMachine(const MachineConfig& cfg, DataType dtype)
    : regs_(cfg.vrf_regs),
      velems_(cfg.vec_elems()),
      ratio_(dtype.acc_ratio()),
      line_bytes_(cfg.line_bytes) {
  input_bytes_ = dtype.input_bytes();
}

void TileMachine::reset_census() {
  alu_slots_ = 0;
  mem_slots_ = 0;
}

void TileMachine::vload_strided(int dst, int count, const std::int8_t* a, std::int64_t lda,
                                std::int64_t m0, std::int64_t k0, std::int64_t m_limit,
                                std::int64_t k_limit) {
  for (int q = 0; q < count; ++q) {
    VReg& r = regs_[dst + q];
    r.b.fill(0);
    for (int i = 0; i < velems_; ++i) {
      std::int64_t row = m0 + static_cast<std::int64_t>(q) * velems_ + i;
      for (int u = 0; u < ratio_; ++u) {
        std::int64_t col = k0 + u;
        std::int8_t v = (row < m_limit && col < k_limit) ? a[row * lda + col] : 0;
        r.b[4 * i + u] = static_cast<std::uint8_t>(v);
      }
    }
  }
  mem_slots_ += ceil_div(count, ratio_);
}

void TileMachine::vload_strided_f16(int dst, int count, const std::uint16_t* a,
                                    std::int64_t lda, std::int64_t m0, std::int64_t k0,
                                    std::int64_t m_limit, std::int64_t k_limit) {
  for (int q = 0; q < count; ++q) {
    VReg& r = regs_[dst + q];
    r.b.fill(0);
    for (int i = 0; i < velems_; ++i) {
      std::int64_t row = m0 + static_cast<std::int64_t>(q) * velems_ + i;
      for (int u = 0; u < ratio_; ++u) {
        std::int64_t col = k0 + u;
        std::uint16_t v = (row < m_limit && col < k_limit) ? a[row * lda + col] : 0;
        std::memcpy(&r.b[4 * i + 2 * u], &v, 2);
      }
    }
  }
  mem_slots_ += ceil_div(count, ratio_);
}

void TileMachine::vload_multibroadcast(int dst, int count, const std::int8_t* bmat,
                                       std::int64_t ldb, std::int64_t k0, std::int64_t n0,
                                       std::int64_t k_limit, std::int64_t n_limit) {
  for (int j = 0; j < count; ++j) {
    VReg& r = regs_[dst + j];
    std::uint8_t group[4] = {0, 0, 0, 0};
    for (int u = 0; u < ratio_; ++u) {
      std::int64_t row = k0 + u;
      std::int64_t col = n0 + j;
      std::int8_t v = (row < k_limit && col < n_limit) ? bmat[row * ldb + col] : 0;
      group[u] = static_cast<std::uint8_t>(v);
    }
    for (int i = 0; i < velems_; ++i) std::memcpy(&r.b[4 * i], group, 4);
  }
  mem_slots_ += std::max<std::int64_t>(
      1, ceil_div(static_cast<std::int64_t>(count) * input_bytes_, line_bytes_));
}

void TileMachine::vload_multibroadcast_f16(int dst, int count, const std::uint16_t* bmat,
                                           std::int64_t ldb, std::int64_t k0,
                                           std::int64_t n0, std::int64_t k_limit,
                                           std::int64_t n_limit) {
  for (int j = 0; j < count; ++j) {
    VReg& r = regs_[dst + j];
    std::uint8_t group[4] = {0, 0, 0, 0};
    for (int u = 0; u < ratio_; ++u) {
      std::int64_t row = k0 + u;
      std::int64_t col = n0 + j;
      std::uint16_t v = (row < k_limit && col < n_limit) ? bmat[row * ldb + col] : 0;
      std::memcpy(&group[2 * u], &v, 2);
    }
    for (int i = 0; i < velems_; ++i) std::memcpy(&r.b[4 * i], group, 4);
  }
  mem_slots_ += std::max<std::int64_t>(
      1, ceil_div(static_cast<std::int64_t>(count) * input_bytes_, line_bytes_));
}

void TileMachine::vfma_i8_i32(int acc, int a, int b) {
  VReg& dst = regs_[acc];
  const VReg& ra = regs_[a];
  const VReg& rb = regs_[b];
  for (int i = 0; i < velems_; ++i) {
    std::int32_t sum;
    std::memcpy(&sum, &dst.b[4 * i], 4);
    for (int u = 0; u < 4; ++u) {
      std::int32_t av = static_cast<std::int8_t>(ra.b[4 * i + u]);
      std::int32_t bv = static_cast<std::int8_t>(rb.b[4 * i + u]);
      sum += av * bv;
    }
    std::memcpy(&dst.b[4 * i], &sum, 4);
  }
  ++alu_slots_;
}

void TileMachine::vfma_f16_f32(int acc, int a, int b) {
  VReg& dst = regs_[acc];
  const VReg& ra = regs_[a];
  const VReg& rb = regs_[b];
  for (int i = 0; i < velems_; ++i) {
    float sum;
    std::memcpy(&sum, &dst.b[4 * i], 4);
    std::uint16_t a0, a1, b0, b1;
    std::memcpy(&a0, &ra.b[4 * i], 2);
    std::memcpy(&a1, &ra.b[4 * i + 2], 2);
    std::memcpy(&b0, &rb.b[4 * i], 2);
    std::memcpy(&b1, &rb.b[4 * i + 2], 2);
    // Products are exact in fp32; one rounding for the pair sum, one for
    // the accumulate. The scalar reference follows the same order.
    float p0 = f16_to_f32(a0) * f16_to_f32(b0);
    float p1 = f16_to_f32(a1) * f16_to_f32(b1);
    sum += p0 + p1;
    std::memcpy(&dst.b[4 * i], &sum, 4);
  }
  ++alu_slots_;
}

void TileMachine::vzero(int reg) { regs_[reg].b.fill(0); }

void TileMachine::vstore_i32(int reg, std::int32_t* dst, std::int64_t count) {
  for (std::int64_t i = 0; i < count && i < velems_; ++i)
    std::memcpy(&dst[i], &regs_[reg].b[4 * i], 4);
  ++mem_slots_;
}

void TileMachine::vstore_f32(int reg, float* dst, std::int64_t count) {
  for (std::int64_t i = 0; i < count && i < velems_; ++i)
    std::memcpy(&dst[i], &regs_[reg].b[4 * i], 4);
  ++mem_slots_;
}

std::int32_t TileMachine::vreduce_add_i32(int reg) {
  std::int32_t total = 0;
  for (int i = 0; i < velems_; ++i) {
    std::int32_t v;
    std::memcpy(&v, &regs_[reg].b[4 * i], 4);
    total += v;
  }
  ++alu_slots_;
  return total;
}

float TileMachine::vreduce_add_f32(int reg) {
  float total = 0;
  for (int i = 0; i < velems_; ++i) {
    float v;
    std::memcpy(&v, &regs_[reg].b[4 * i], 4);
    total += v;
  }
  ++alu_slots_;
  return total;
}

namespace {

template <typename T, bool kFloat>
KernelRun run_matmul_impl(const std::vector<T>& a, const std::vector<T>& b, std::int64_t m,
                          std::int64_t n, std::int64_t k, const Microkernel& mk,
                          const MachineConfig& cfg, DataType dtype) {
  assert(mk.fits(cfg.vrf_regs));
  TileMachine tm_machine(cfg, dtype);
  const int V = tm_machine.vec_elems();
  const int r = dtype.acc_ratio();
  const int acc_base = 0;
  const int a_base = mk.tm * mk.tn;
  const int b_base = a_base + mk.tm;

  KernelRun out;
  if constexpr (kFloat)
    out.c_f32.assign(m * n, 0.0f);
  else
    out.c_i32.assign(m * n, 0);

  std::vector<std::int32_t> tmp_i(V);
  std::vector<float> tmp_f(V);

  for (std::int64_t m0 = 0; m0 < m; m0 += static_cast<std::int64_t>(mk.tm) * V) {
    for (std::int64_t n0 = 0; n0 < n; n0 += mk.tn) {
      for (int t = 0; t < mk.tm; ++t)
        for (int j = 0; j < mk.tn; ++j) tm_machine.vzero(acc_base + t * mk.tn + j);
      for (std::int64_t k0 = 0; k0 < k; k0 += r) {
        if constexpr (kFloat) {
          tm_machine.vload_strided_f16(a_base, mk.tm, a.data(), k, m0, k0, m, k);
          tm_machine.vload_multibroadcast_f16(b_base, mk.tn, b.data(), n, k0, n0, k, n);
        } else {
          tm_machine.vload_strided(a_base, mk.tm, a.data(), k, m0, k0, m, k);
          tm_machine.vload_multibroadcast(b_base, mk.tn, b.data(), n, k0, n0, k, n);
        }
        for (int t = 0; t < mk.tm; ++t)
          for (int j = 0; j < mk.tn; ++j) {
            if constexpr (kFloat)
              tm_machine.vfma_f16_f32(acc_base + t * mk.tn + j, a_base + t, b_base + j);
            else
              tm_machine.vfma_i8_i32(acc_base + t * mk.tn + j, a_base + t, b_base + j);
          }
      }
      // Epilogue: each accumulator register holds a column strip of C.
      for (int t = 0; t < mk.tm; ++t) {
        std::int64_t row0 = m0 + static_cast<std::int64_t>(t) * V;
        std::int64_t rows = std::min<std::int64_t>(V, m - row0);
        if (rows <= 0) {
          // Clamped tile; the store slot still issues.
          for (int j = 0; j < mk.tn; ++j) {
            if constexpr (kFloat)
              tm_machine.vstore_f32(acc_base + t * mk.tn + j, tmp_f.data(), 0);
            else
              tm_machine.vstore_i32(acc_base + t * mk.tn + j, tmp_i.data(), 0);
          }
          continue;
        }
        for (int j = 0; j < mk.tn; ++j) {
          std::int64_t col = n0 + j;
          if constexpr (kFloat) {
            tm_machine.vstore_f32(acc_base + t * mk.tn + j, tmp_f.data(), rows);
            if (col < n)
              for (std::int64_t i = 0; i < rows; ++i)
                out.c_f32[(row0 + i) * n + col] = tmp_f[i];
          } else {
            tm_machine.vstore_i32(acc_base + t * mk.tn + j, tmp_i.data(), rows);
            if (col < n)
              for (std::int64_t i = 0; i < rows; ++i)
                out.c_i32[(row0 + i) * n + col] = tmp_i[i];
          }
        }
      }
    }
  }
  out.alu_slots = tm_machine.alu_slots();
  out.mem_slots = tm_machine.mem_slots();
  out.cycles = tm_machine.cycles();
  return out;
}

}  // namespace

KernelRun run_matmul_int8(const std::vector<std::int8_t>& a,
                          const std::vector<std::int8_t>& b, std::int64_t m,
                          std::int64_t n, std::int64_t k, const Microkernel& mk,
                          const MachineConfig& cfg) {
  return run_matmul_impl<std::int8_t, false>(a, b, m, n, k, mk, cfg, {DataKind::Int8});
}

KernelRun run_matmul_fp16(const std::vector<std::uint16_t>& a,
                          const std::vector<std::uint16_t>& b, std::int64_t m,
                          std::int64_t n, std::int64_t k, const Microkernel& mk,
                          const MachineConfig& cfg) {
  return run_matmul_impl<std::uint16_t, true>(a, b, m, n, k, mk, cfg, {DataKind::FP16});
}

std::vector<std::int32_t> ref_matmul_int8(const std::vector<std::int8_t>& a,
                                          const std::vector<std::int8_t>& b,
                                          std::int64_t m, std::int64_t n, std::int64_t k) {
  std::vector<std::int32_t> c(m * n, 0);
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      std::int32_t sum = 0;
      for (std::int64_t p = 0; p < k; ++p)
        sum += static_cast<std::int32_t>(a[i * k + p]) * b[p * n + j];
      c[i * n + j] = sum;
    }
  return c;
}

std::vector<float> ref_matmul_fp16(const std::vector<std::uint16_t>& a,
                                   const std::vector<std::uint16_t>& b, std::int64_t m,
                                   std::int64_t n, std::int64_t k) {
  std::vector<float> c(m * n, 0.0f);
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      float sum = 0.0f;
      // Pairwise in ascending k, matching the packed-FMA order exactly.
      for (std::int64_t p = 0; p < k; p += 2) {
        float p0 = f16_to_f32(a[i * k + p]) * f16_to_f32(b[p * n + j]);
        float p1 = (p + 1 < k)
                       ? f16_to_f32(a[i * k + p + 1]) * f16_to_f32(b[(p + 1) * n + j])
                       : 0.0f;
        sum += p0 + p1;
      }
      c[i * n + j] = sum;
    }
  return c;
}

}  // namespace upcycle::emu
