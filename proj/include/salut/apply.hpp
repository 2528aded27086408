#pragma once

#include "salut/image.hpp"
#include "salut/lut.hpp"

#include <cstddef>
#include <new>
#include <vector>

namespace salut {

/// Minimal 64-byte aligned allocator so lattice rows start on cache lines.
template <class T>
struct CacheAlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    CacheAlignedAllocator() = default;
    template <class U>
    CacheAlignedAllocator(const CacheAlignedAllocator<U>&) noexcept
    {
    }
    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
    template <class U>
    bool operator==(const CacheAlignedAllocator<U>&) const noexcept
    {
        return true;
    }
};

/// Node-interleaved float copy of a Lut4D for the per-pixel hot loop.
///
/// Each color node holds max(C,2) context slices of four floats (RGB + pad),
/// so one lookup reads two adjacent slices with a single 32-byte load. A
/// single-bin LUT duplicates its slice. With exactly two slices every node
/// also carries a copy of its +b neighbour (16 floats, one cache line), so the
/// two b corners of a lookup come from one aligned 64-byte load.
class PackedLut4D {
public:
    PackedLut4D() = default;
    explicit PackedLut4D(const Lut4D& lut);

    std::size_t size() const noexcept { return m_size; }
    std::size_t bins() const noexcept { return m_bins; }
    std::size_t sliceCount() const noexcept { return m_slices; }
    /// Floats between consecutive color nodes.
    std::size_t nodeStride() const noexcept { return m_nodeStride; }
    const float* data() const noexcept { return m_data.data(); }

private:
    std::size_t m_size = 0;
    std::size_t m_bins = 0;
    std::size_t m_slices = 0;
    std::size_t m_nodeStride = 0;
    std::vector<float, CacheAlignedAllocator<float>> m_data;
};

/// "avx2-fma" or "scalar", depending on how the library was compiled.
const char* apply_kernel_name() noexcept;

/// Number of workers used when the caller passes threads == 0.
std::size_t default_thread_count();

/// Writes the transformed image into out (resized when its shape differs).
/// Rows are split into contiguous stripes; every pixel is computed by the same
/// code whatever the stripe count, so the result does not depend on threads.
void apply_lut4d_into(const PackedLut4D& lut, const ImageBuffer& content, const ContextMap& ctx,
                      ImageBuffer& out, std::size_t threads = 1);

ImageBuffer apply_lut4d(const Lut4D& lut, const ImageBuffer& content, const ContextMap& ctx,
                        std::size_t threads = 1);

/// Trilinear application; identical to apply_lut4d on the single-bin LUT
/// built from the same entries.
ImageBuffer apply_lut3d(const Lut3D& lut, const ImageBuffer& content, std::size_t threads = 1);

} // namespace salut
