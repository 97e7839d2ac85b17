#pragma once

namespace aered {

/// Keeps large training buffers on the heap instead of fresh mmap pages each
/// epoch. No-op outside glibc.
void tune_allocator();

}  // namespace aered
