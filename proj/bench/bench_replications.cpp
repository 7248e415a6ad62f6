// Compares the serial reference runner against the OpenMP replication runner
// on a mid-size workload and checks that both produce identical results.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "itd/harness.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_rows(const itd::ExperimentResult& a, const itd::ExperimentResult& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (size_t i = 0; i < a.rows.size(); ++i) {
        const auto& x = a.rows[i];
        const auto& y = b.rows[i];
        if (x.replication != y.replication || x.step != y.step || x.metric != y.metric ||
            x.value != y.value)
            return false;
    }
    return true;
}

}  // namespace

int main() {
    itd::ExperimentConfig cfg;
    cfg.env.kind = itd::EnvSpec::Kind::RandomMrp;
    cfg.env.n_states = 100;
    cfg.env.d = 20;
    cfg.env.gamma = 0.9;
    cfg.env.env_seed = 77;
    cfg.family = itd::AlgorithmFamily::Td;
    cfg.mode = itd::UpdateMode::Implicit;
    cfg.schedule_alpha = itd::StepSizeSchedule::polynomial(300.0, 1.0);
    cfg.projection_r = 5000.0;
    cfg.n_steps = 50000;
    cfg.n_replications = 32;
    cfg.master_seed = 4242;
    cfg.metrics = {itd::Metric::ParamError};

    std::printf("replication benchmark: %d replications x %ld steps, omp_max_threads=%d\n",
                cfg.n_replications, cfg.n_steps, omp_get_max_threads());

    auto t0 = Clock::now();
    const itd::ExperimentResult serial = itd::run_experiment(cfg, itd::Parallelism::Serial);
    const double t_serial = seconds_since(t0);

    t0 = Clock::now();
    const itd::ExperimentResult parallel = itd::run_experiment(cfg, itd::Parallelism::OpenMp);
    const double t_parallel = seconds_since(t0);

    std::printf("serial   : %8.3f s\n", t_serial);
    std::printf("openmp   : %8.3f s  (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);
    if (!same_rows(serial, parallel)) {
        std::printf("MISMATCH: serial and parallel runners disagree\n");
        return 1;
    }
    std::printf("outputs identical across runners\n");
    return 0;
}
