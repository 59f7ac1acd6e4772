#include "fracspec/parallel.hpp"

#include <atomic>

namespace fracspec {

namespace {
std::atomic<unsigned> g_workers{1};
}

unsigned default_workers() { return g_workers.load(); }
void set_default_workers(unsigned workers) { g_workers.store(std::max(1u, workers)); }

}  // namespace fracspec
