// Acceptance suite: one pass/fail line per criterion; nonzero exit on
// any failure.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <thread>

#include "sirtail/validate.hpp"

int main(int argc, char** argv)
{
    sirtail::acceptance::Options opts;
    opts.threads = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--threads") == 0)
            opts.threads = std::atoi(argv[i + 1]);
        if (std::strcmp(argv[i], "--seed") == 0)
            opts.seed = std::strtoull(argv[i + 1], nullptr, 10);
    }

    const auto results = sirtail::acceptance::run_all(opts, std::cout);
    int failed = 0;
    for (const auto& r : results)
        failed += r.pass ? 0 : 1;
    std::cout << (failed == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
              << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
              << " criteria)\n";
    return failed == 0 ? 0 : 1;
}
