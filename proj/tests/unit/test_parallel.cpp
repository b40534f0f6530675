#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "visword/parallel.hpp"

using namespace visword;

TEST(ParallelFor, VisitsEachIndexOnce) {
    std::vector<std::atomic<int>> seen(1000);
    parallel_for(seen.size(), [&](std::size_t i) { seen[i]++; });
    for (const auto& s : seen) EXPECT_EQ(s.load(), 1);
    parallel_for(0, [](std::size_t) { FAIL(); });
}

TEST(ParallelFor, RethrowsWorkerException) {
    EXPECT_THROW(parallel_for(100,
                              [](std::size_t i) {
                                  if (i == 37) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(WorkerCount, HonoursEnvironmentCap) {
    ::setenv("VISWORD_THREADS", "1", 1);
    EXPECT_EQ(worker_count(), 1u);
    ::setenv("VISWORD_THREADS", "junk", 1);
    EXPECT_GE(worker_count(), 1u);
    ::setenv("VISWORD_THREADS", "0", 1);
    EXPECT_GE(worker_count(), 1u);
    ::unsetenv("VISWORD_THREADS");
}
