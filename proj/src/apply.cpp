#include "salut/apply.hpp"

#include "salut/error.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <thread>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define SALUT_APPLY_AVX2 1
#if defined(__AVX512F__) && defined(__AVX512DQ__)
#define SALUT_APPLY_AVX512 1
#endif
#endif

namespace salut {

namespace {

struct Axis {
    int lo;
    float frac;
};

inline Axis locate(float v, int nodes)
{
    v = v > 0.0f ? (v < 1.0f ? v : 1.0f) : 0.0f;
    const float x = v * static_cast<float>(nodes - 1);
    const int lo = std::min(static_cast<int>(x), nodes - 2);
    return {lo, x - static_cast<float>(lo)};
}

struct Kernel {
    const float* lut;
    int size;
    int bins;
    std::size_t nodeStride; // floats per color node
    std::size_t strideB;
    std::size_t strideG;
    std::size_t strideR;

    explicit Kernel(const PackedLut4D& packed)
        : lut(packed.data()),
          size(static_cast<int>(packed.size())),
          bins(static_cast<int>(packed.bins())),
          nodeStride(packed.nodeStride()),
          strideB(nodeStride),
          strideG(nodeStride * packed.size()),
          strideR(nodeStride * packed.size() * packed.size())
    {
    }

#ifdef SALUT_APPLY_AVX2
    struct V {
        __m256i lo;
        __m256 f1;
        __m256 f0;
    };

    // Clamped lattice coordinate of 8 values: lower node and both weights.
    static V axis(const float* v, int nodes)
    {
        const __m256 one = _mm256_set1_ps(1.0f);
        __m256 x = _mm256_min_ps(_mm256_max_ps(_mm256_load_ps(v), _mm256_setzero_ps()), one);
        x = _mm256_mul_ps(x, _mm256_set1_ps(static_cast<float>(nodes - 1)));
        const __m256i lo = _mm256_min_epi32(_mm256_cvttps_epi32(x), _mm256_set1_epi32(nodes - 2));
        const __m256 f1 = _mm256_sub_ps(x, _mm256_cvtepi32_ps(lo));
        return V{lo, f1, _mm256_sub_ps(one, f1)};
    }

    // Full aligned blocks bypass the cache; the output is not read back here.
    static void flush(const float* res, float* out, std::size_t n)
    {
        if (n == 8 && (reinterpret_cast<std::uintptr_t>(out) & 15u) == 0) {
            for (int i = 0; i < 24; i += 4) {
                _mm_stream_ps(out + i, _mm_load_ps(res + i));
            }
        } else {
            std::copy_n(res, 3 * n, out);
        }
    }

    // Up to 8 pixels. Coordinates and corner weights are computed 8-wide;
    // every pixel goes through this same path (short blocks are zero padded),
    // so a pixel's result never depends on where a block starts.
    void block(const float* in, const float* gamma, float* out, std::size_t n) const
    {
        alignas(32) float ch[4][8] = {};
        for (std::size_t j = 0; j < n; ++j) {
            ch[0][j] = in[3 * j];
            ch[1][j] = in[3 * j + 1];
            ch[2][j] = in[3 * j + 2];
            ch[3][j] = gamma[j];
        }
        const __m256 zero = _mm256_setzero_ps();
        const __m256 one = _mm256_set1_ps(1.0f);
        const V r = axis(ch[0], size);
        const V g = axis(ch[1], size);
        const V b = axis(ch[2], size);
        V k{_mm256_setzero_si256(), zero, one};
        if (bins > 1) {
            k = axis(ch[3], bins);
        }

        __m256i off = _mm256_mullo_epi32(r.lo, _mm256_set1_epi32(static_cast<int>(strideR)));
        off = _mm256_add_epi32(off, _mm256_mullo_epi32(g.lo, _mm256_set1_epi32(static_cast<int>(strideG))));
        off = _mm256_add_epi32(off, _mm256_mullo_epi32(b.lo, _mm256_set1_epi32(static_cast<int>(strideB))));
        off = _mm256_add_epi32(off, _mm256_slli_epi32(k.lo, 2));

        alignas(32) float w[8][8];
        alignas(32) float kw[2][8];
        alignas(32) std::int32_t base[8];
        const __m256 rg00 = _mm256_mul_ps(r.f0, g.f0);
        const __m256 rg01 = _mm256_mul_ps(r.f0, g.f1);
        const __m256 rg10 = _mm256_mul_ps(r.f1, g.f0);
        const __m256 rg11 = _mm256_mul_ps(r.f1, g.f1);
        _mm256_store_ps(w[0], _mm256_mul_ps(rg00, b.f0));
        _mm256_store_ps(w[1], _mm256_mul_ps(rg00, b.f1));
        _mm256_store_ps(w[2], _mm256_mul_ps(rg01, b.f0));
        _mm256_store_ps(w[3], _mm256_mul_ps(rg01, b.f1));
        _mm256_store_ps(w[4], _mm256_mul_ps(rg10, b.f0));
        _mm256_store_ps(w[5], _mm256_mul_ps(rg10, b.f1));
        _mm256_store_ps(w[6], _mm256_mul_ps(rg11, b.f0));
        _mm256_store_ps(w[7], _mm256_mul_ps(rg11, b.f1));
        _mm256_store_ps(kw[0], k.f0);
        _mm256_store_ps(kw[1], k.f1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(base), off);

        alignas(32) float res[28];
        const std::size_t o1 = strideB;
        const std::size_t o2 = strideG;
        const std::size_t o3 = strideG + strideB;
        const std::size_t o4 = strideR;
        const std::size_t o5 = strideR + strideB;
        const std::size_t o6 = strideR + strideG;
        const std::size_t o7 = strideR + strideG + strideB;
        for (std::size_t j = 0; j < n; ++j) {
            const float* p = lut + base[j];
            __m256 acc = _mm256_mul_ps(_mm256_broadcast_ss(&w[0][j]), _mm256_loadu_ps(p));
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[1][j]), _mm256_loadu_ps(p + o1), acc);
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[2][j]), _mm256_loadu_ps(p + o2), acc);
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[3][j]), _mm256_loadu_ps(p + o3), acc);
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[4][j]), _mm256_loadu_ps(p + o4), acc);
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[5][j]), _mm256_loadu_ps(p + o5), acc);
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[6][j]), _mm256_loadu_ps(p + o6), acc);
            acc = _mm256_fmadd_ps(_mm256_broadcast_ss(&w[7][j]), _mm256_loadu_ps(p + o7), acc);
            const __m128 blended =
                _mm_fmadd_ps(_mm_broadcast_ss(&kw[1][j]), _mm256_extractf128_ps(acc, 1),
                             _mm_mul_ps(_mm_broadcast_ss(&kw[0][j]), _mm256_castps256_ps128(acc)));
            _mm_storeu_ps(res + 3 * j, blended);
        }
        flush(res, out, n);
    }
#ifdef SALUT_APPLY_AVX512
    // Two context slices per node (C <= 2): a packed node also holds its +b
    // neighbour, so each (r, g) corner is one aligned 16-float load holding
    // [b: k0 k1 | b+1: k0 k1]. Those are weighted per lane by b and k and
    // folded down to one RGB.
    void blockPair(const float* in, const float* gamma, float* out, std::size_t n) const
    {
        alignas(32) float ch[4][8] = {};
        for (std::size_t j = 0; j < n; ++j) {
            ch[0][j] = in[3 * j];
            ch[1][j] = in[3 * j + 1];
            ch[2][j] = in[3 * j + 2];
            ch[3][j] = gamma[j];
        }
        const V r = axis(ch[0], size);
        const V g = axis(ch[1], size);
        const V b = axis(ch[2], size);
        V k{_mm256_setzero_si256(), _mm256_setzero_ps(), _mm256_set1_ps(1.0f)};
        if (bins > 1) {
            k = axis(ch[3], bins);
        }
        __m256i off = _mm256_mullo_epi32(r.lo, _mm256_set1_epi32(static_cast<int>(strideR)));
        off = _mm256_add_epi32(off, _mm256_mullo_epi32(g.lo, _mm256_set1_epi32(static_cast<int>(strideG))));
        off = _mm256_add_epi32(off, _mm256_mullo_epi32(b.lo, _mm256_set1_epi32(static_cast<int>(strideB))));

        alignas(32) float w[4][8];
        alignas(32) float q[4][8];
        alignas(32) std::int32_t base[8];
        _mm256_store_ps(w[0], _mm256_mul_ps(r.f0, g.f0));
        _mm256_store_ps(w[1], _mm256_mul_ps(r.f0, g.f1));
        _mm256_store_ps(w[2], _mm256_mul_ps(r.f1, g.f0));
        _mm256_store_ps(w[3], _mm256_mul_ps(r.f1, g.f1));
        _mm256_store_si256(reinterpret_cast<__m256i*>(base), off);

        // Per-pixel lane weights (b0k0, b0k1, b1k0, b1k1), transposed so each
        // pixel's four values are contiguous: pixel j lives in q[j % 4][4 * (j / 4)].
        const __m256 q0 = _mm256_mul_ps(b.f0, k.f0);
        const __m256 q1 = _mm256_mul_ps(b.f0, k.f1);
        const __m256 q2 = _mm256_mul_ps(b.f1, k.f0);
        const __m256 q3 = _mm256_mul_ps(b.f1, k.f1);
        const __m256 t0 = _mm256_unpacklo_ps(q0, q1);
        const __m256 t1 = _mm256_unpackhi_ps(q0, q1);
        const __m256 t2 = _mm256_unpacklo_ps(q2, q3);
        const __m256 t3 = _mm256_unpackhi_ps(q2, q3);
        _mm256_store_ps(q[0], _mm256_shuffle_ps(t0, t2, 0x44));
        _mm256_store_ps(q[1], _mm256_shuffle_ps(t0, t2, 0xEE));
        _mm256_store_ps(q[2], _mm256_shuffle_ps(t1, t3, 0x44));
        _mm256_store_ps(q[3], _mm256_shuffle_ps(t1, t3, 0xEE));

        alignas(32) float res[28];
        const __m512i spread = _mm512_set_epi32(3, 3, 3, 3, 2, 2, 2, 2, 1, 1, 1, 1, 0, 0, 0, 0);
        for (std::size_t j = 0; j < n; ++j) {
            const float* p = lut + base[j];
            __m512 acc = _mm512_mul_ps(_mm512_set1_ps(w[0][j]), _mm512_load_ps(p));
            acc = _mm512_fmadd_ps(_mm512_set1_ps(w[1][j]), _mm512_load_ps(p + strideG), acc);
            acc = _mm512_fmadd_ps(_mm512_set1_ps(w[2][j]), _mm512_load_ps(p + strideR), acc);
            acc = _mm512_fmadd_ps(_mm512_set1_ps(w[3][j]), _mm512_load_ps(p + strideR + strideG), acc);
            const __m128 qj = _mm_load_ps(&q[j % 4][4 * (j / 4)]);
            acc = _mm512_mul_ps(acc, _mm512_permutexvar_ps(spread, _mm512_castps128_ps512(qj)));
            const __m256 half = _mm256_add_ps(_mm512_castps512_ps256(acc), _mm512_extractf32x8_ps(acc, 1));
            const __m128 rgb = _mm_add_ps(_mm256_castps256_ps128(half), _mm256_extractf128_ps(half, 1));
            // The fourth lane lands on the next pixel's red, rewritten next iteration.
            _mm_storeu_ps(res + 3 * j, rgb);
        }
        flush(res, out, n);
    }
#endif
#else
    void pixel(const float* in, float gamma, float* out) const
    {
        const Axis ar = locate(in[0], size);
        const Axis ag = locate(in[1], size);
        const Axis ab = locate(in[2], size);
        Axis ak{0, 0.0f};
        if (bins > 1) {
            ak = locate(gamma, bins);
        }

        const float* p = lut + static_cast<std::size_t>(ar.lo) * strideR + static_cast<std::size_t>(ag.lo) * strideG
                         + static_cast<std::size_t>(ab.lo) * strideB + static_cast<std::size_t>(ak.lo) * 4;

        const float r1 = ar.frac, r0 = 1.0f - r1;
        const float g1 = ag.frac, g0 = 1.0f - g1;
        const float b1 = ab.frac, b0 = 1.0f - b1;
        const float rg00 = r0 * g0, rg01 = r0 * g1, rg10 = r1 * g0, rg11 = r1 * g1;
        const float k1 = ak.frac, k0 = 1.0f - k1;

        const float w[8] = {rg00 * b0, rg00 * b1, rg01 * b0, rg01 * b1,
                            rg10 * b0, rg10 * b1, rg11 * b0, rg11 * b1};
        const std::size_t off[8] = {0, strideB, strideG, strideG + strideB,
                                    strideR, strideR + strideB, strideR + strideG, strideR + strideG + strideB};
        float acc[8] = {};
        for (int n = 0; n < 8; ++n) {
            const float* q = p + off[n];
            for (int j = 0; j < 8; ++j) {
                acc[j] += w[n] * q[j];
            }
        }
        for (int c = 0; c < 3; ++c) {
            out[c] = k0 * acc[c] + k1 * acc[4 + c];
        }
    }

    void block(const float* in, const float* gamma, float* out, std::size_t n) const
    {
        for (std::size_t j = 0; j < n; ++j) {
            pixel(in + 3 * j, gamma[j], out + 3 * j);
        }
    }
#endif
};

template <typename Fn>
void forEachStripe(std::size_t rows, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, rows));
    if (threads == 1) {
        fn(std::size_t{0}, rows);
        return;
    }
    const std::size_t per = (rows + threads - 1) / threads;
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * per;
        const std::size_t end = std::min(rows, begin + per);
        if (begin >= end) {
            break;
        }
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

} // namespace

PackedLut4D::PackedLut4D(const Lut4D& lut)
    : m_size(lut.size()), m_bins(lut.bins()), m_slices(std::max<std::size_t>(lut.bins(), 2))
{
    const bool paired = m_slices == 2;
    const std::size_t nodeFloats = m_slices * 4;
    m_nodeStride = paired ? 2 * nodeFloats : nodeFloats;
    m_data.assign(lut.nodeCount() * m_nodeStride, 0.0f);
    for (std::size_t r = 0; r < m_size; ++r) {
        for (std::size_t g = 0; g < m_size; ++g) {
            for (std::size_t b = 0; b < m_size; ++b) {
                float* node = m_data.data() + ((r * m_size + g) * m_size + b) * m_nodeStride;
                for (std::size_t half = 0; half < (paired ? 2u : 1u); ++half) {
                    const std::size_t bb = std::min(b + half, m_size - 1);
                    for (std::size_t s = 0; s < m_slices; ++s) {
                        const std::size_t k = std::min(s, m_bins - 1);
                        float* dst = node + half * nodeFloats + s * 4;
                        for (std::size_t c = 0; c < 3; ++c) {
                            dst[c] = static_cast<float>(lut.entry(c, k, r, g, bb));
                        }
                    }
                }
            }
        }
    }
}

const char* apply_kernel_name() noexcept
{
#ifdef SALUT_APPLY_AVX2
#ifdef SALUT_APPLY_AVX512
    return "avx512";
#else
    return "avx2-fma";
#endif
#else
    return "scalar";
#endif
}

std::size_t default_thread_count()
{
    return std::max<unsigned>(1, std::thread::hardware_concurrency());
}

void apply_lut4d_into(const PackedLut4D& lut, const ImageBuffer& content, const ContextMap& ctx,
                      ImageBuffer& out, std::size_t threads)
{
    if (!ctx.matches(content)) {
        throw Error(ErrorKind::DimensionMismatch,
                    "context map is " + std::to_string(ctx.height()) + "x" + std::to_string(ctx.width())
                        + " but content is " + std::to_string(content.height()) + "x"
                        + std::to_string(content.width()));
    }
    if (lut.size() < 2) {
        throw Error(ErrorKind::InvalidDimension, "empty LUT");
    }
    if (!out.sameShape(content) || out.values().size() != content.values().size()) {
        out = ImageBuffer(content.height(), content.width(), content.space());
    }
    out.setSpace(content.space());

    if (threads == 0) {
        threads = default_thread_count();
    }
    const Kernel kernel(lut);
    [[maybe_unused]] const bool pairSlices = lut.sliceCount() == 2;
    const std::size_t width = content.width();
    const float* src = content.values().data();
    const float* gamma = ctx.values().data();
    float* dst = out.values().data();

    forEachStripe(content.height(), threads, [&](std::size_t y0, std::size_t y1) {
        const std::size_t end = y1 * width;
        for (std::size_t i = y0 * width; i < end; i += 8) {
            const std::size_t n = std::min<std::size_t>(8, end - i);
#ifdef SALUT_APPLY_AVX512
            if (pairSlices) {
                kernel.blockPair(src + 3 * i, gamma + i, dst + 3 * i, n);
                continue;
            }
#endif
            kernel.block(src + 3 * i, gamma + i, dst + 3 * i, n);
        }
#ifdef SALUT_APPLY_AVX2
        _mm_sfence();
#endif
    });
}

ImageBuffer apply_lut4d(const Lut4D& lut, const ImageBuffer& content, const ContextMap& ctx, std::size_t threads)
{
    ImageBuffer out;
    apply_lut4d_into(PackedLut4D(lut), content, ctx, out, threads);
    return out;
}

ImageBuffer apply_lut3d(const Lut3D& lut, const ImageBuffer& content, std::size_t threads)
{
    const ContextMap zero(content.height(), content.width(), 0.0f);
    const bool unitDomain = lut.domainMin == std::array<double, 3>{0.0, 0.0, 0.0}
                            && lut.domainMax == std::array<double, 3>{1.0, 1.0, 1.0};
    if (unitDomain) {
        return apply_lut4d(to_lut4d(lut), content, zero, threads);
    }
    ImageBuffer remapped = content;
    std::span<float> v = remapped.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t c = i % 3;
        const double span = lut.domainMax[c] - lut.domainMin[c];
        v[i] = span > 0.0 ? static_cast<float>((v[i] - lut.domainMin[c]) / span) : 0.0f;
    }
    return apply_lut4d(to_lut4d(lut), remapped, zero, threads);
}

} // namespace salut
