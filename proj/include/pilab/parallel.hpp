#pragma once

#include <cstddef>
#include <functional>

namespace pilab::par {

// Global execution mode. All batch kernels go through parallel_for; with mode off
// they run as a plain serial loop (the reference path used in tests), with mode on
// they run under OpenMP. Kernels write results to per-index slots and reductions
// happen in fixed index order afterwards, so both paths produce identical bytes.
void set_enabled(bool on);
bool enabled();

void set_max_threads(int n);  // <=0 means library default
int max_threads();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Serial loop regardless of mode (reference path).
void serial_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pilab::par
