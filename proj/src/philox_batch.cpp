#include <cstdint>

#include "cascadelab/rng.hpp"

#if defined(__AVX512F__) || defined(__AVX2__)
#include <immintrin.h>
#endif

namespace cascadelab::philox {

namespace {

void scalar_words(std::uint32_t k0, std::uint32_t k1, std::uint32_t c2, std::uint32_t c3,
                  std::uint64_t first, std::size_t count, std::uint64_t* w0, std::uint64_t* w1) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t h = first + i;
    const Block b = apply({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32), c2, c3},
                          {k0, k1});
    w0[i] = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
    w1[i] = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
  }
}

}  // namespace

// High bits of each 64-bit lane are left unmasked between rounds: they only
// ever reach the multiplier, which reads the low 32 bits, or the final
// shift-left, which drops them.
void batch_words(std::uint32_t k0, std::uint32_t k1, std::uint32_t replica, std::uint32_t stream,
                 std::uint64_t first_address, std::size_t count, std::uint64_t* w0,
                 std::uint64_t* w1) {
  std::size_t i = 0;
#if defined(__AVX512F__)
  {
    const __m512i m0 = _mm512_set1_epi64(kMul0);
    const __m512i m1 = _mm512_set1_epi64(kMul1);
    const __m512i low = _mm512_set1_epi64(0xFFFFFFFFll);
    const __m512i lane = _mm512_set_epi64(7, 6, 5, 4, 3, 2, 1, 0);
    __m512i rk0[10];
    __m512i rk1[10];
    std::uint32_t a = k0;
    std::uint32_t b = k1;
    for (int r = 0; r < 10; ++r) {
      rk0[r] = _mm512_set1_epi64(a);
      rk1[r] = _mm512_set1_epi64(b);
      a += kWeyl0;
      b += kWeyl1;
    }
    const __m512i c2i = _mm512_set1_epi64(replica);
    const __m512i c3i = _mm512_set1_epi64(stream);
    for (; i + 8 <= count; i += 8) {
      const __m512i h = _mm512_add_epi64(_mm512_set1_epi64(static_cast<long long>(first_address + i)), lane);
      __m512i c0 = h;
      __m512i c1 = _mm512_srli_epi64(h, 32);
      __m512i c2 = c2i;
      __m512i c3 = c3i;
      for (int r = 0; r < 10; ++r) {
        const __m512i p0 = _mm512_mul_epu32(c0, m0);
        const __m512i p1 = _mm512_mul_epu32(c2, m1);
        c0 = _mm512_ternarylogic_epi64(_mm512_srli_epi64(p1, 32), c1, rk0[r], 0x96);
        c2 = _mm512_ternarylogic_epi64(_mm512_srli_epi64(p0, 32), c3, rk1[r], 0x96);
        c1 = p1;
        c3 = p0;
      }
      _mm512_storeu_si512(w0 + i, _mm512_or_si512(_mm512_slli_epi64(c1, 32), _mm512_and_si512(c0, low)));
      _mm512_storeu_si512(w1 + i, _mm512_or_si512(_mm512_slli_epi64(c3, 32), _mm512_and_si512(c2, low)));
    }
  }
#elif defined(__AVX2__)
  {
    const __m256i m0 = _mm256_set1_epi64x(kMul0);
    const __m256i m1 = _mm256_set1_epi64x(kMul1);
    const __m256i low = _mm256_set1_epi64x(0xFFFFFFFFll);
    const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
    __m256i rk0[10];
    __m256i rk1[10];
    std::uint32_t a = k0;
    std::uint32_t b = k1;
    for (int r = 0; r < 10; ++r) {
      rk0[r] = _mm256_set1_epi64x(a);
      rk1[r] = _mm256_set1_epi64x(b);
      a += kWeyl0;
      b += kWeyl1;
    }
    const __m256i c2i = _mm256_set1_epi64x(replica);
    const __m256i c3i = _mm256_set1_epi64x(stream);
    for (; i + 4 <= count; i += 4) {
      const __m256i h = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first_address + i)), lane);
      __m256i c0 = h;
      __m256i c1 = _mm256_srli_epi64(h, 32);
      __m256i c2 = c2i;
      __m256i c3 = c3i;
      for (int r = 0; r < 10; ++r) {
        const __m256i p0 = _mm256_mul_epu32(c0, m0);
        const __m256i p1 = _mm256_mul_epu32(c2, m1);
        c0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), c1), rk0[r]);
        c2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), c3), rk1[r]);
        c1 = p1;
        c3 = p0;
      }
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(w0 + i),
                          _mm256_or_si256(_mm256_slli_epi64(c1, 32), _mm256_and_si256(c0, low)));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(w1 + i),
                          _mm256_or_si256(_mm256_slli_epi64(c3, 32), _mm256_and_si256(c2, low)));
    }
  }
#endif
  scalar_words(k0, k1, replica, stream, first_address + i, count - i, w0 + i, w1 + i);
}

}  // namespace cascadelab::philox
