// Compares the OpenMP multi-trial runner against the serial reference path
// on one preset curve and verifies the traces agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <sstream>

#include <omp.h>

#include "genoja/harness.hpp"
#include "genoja/parallel.hpp"

using namespace genoja;

namespace {

double time_run(const ExperimentSetup& setup, bool parallel, Trace& out) {
    auto t0 = std::chrono::steady_clock::now();
    out = run_experiment(setup, parallel);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

std::string body(const Trace& trace) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    std::string s = os.str();
    return s.substr(s.find("\nt,") + 1);  // skip the meta block
}

}  // namespace

int main(int argc, char** argv) {
    std::int64_t horizon = argc > 1 ? std::atoll(argv[1]) : 20000;
    int trials = argc > 2 ? std::atoi(argv[2]) : 10;

    auto curves = make_preset("fig1-left", horizon, trials);
    const ExperimentSetup& setup = curves.front().setup;  // gen-oja curve

    Trace serial, parallel;
    double t_serial = time_run(setup, false, serial);
    double t_parallel = time_run(setup, true, parallel);

    bool identical = body(serial) == body(parallel);
    std::printf("trials=%d horizon=%lld threads=%d\n", trials,
                static_cast<long long>(horizon), thread_cap());
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s  (speedup %.2fx)\n", t_parallel,
                t_serial / t_parallel);
    std::printf("traces bit-identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
