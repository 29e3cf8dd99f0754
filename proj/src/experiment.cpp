#include "vrdqn/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vrdqn/diagnostics.hpp"
#include "vrdqn/qnet.hpp"

namespace vrdqn {

namespace {

// Fixed formatting keeps output files byte-identical across invocations.
std::string fmt(double v) {
  if (std::isnan(v)) return "";  // empty field, e.g. sgd anchor distance
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(long v) { return std::to_string(v); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double population_std(const std::vector<double>& xs, double mean) {
  double acc = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

// Runs fn(i) for i in [0, n) on up to `jobs` worker threads.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  const int n_workers = std::min(jobs, n);
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : workers) t.join();
}

struct CellOutcome {
  bool ok = false;
  std::string error;
  RunResult run;
};

}  // namespace

std::vector<AggregateRow> aggregate_rows(
    const std::vector<const std::vector<LogRow>*>& runs) {
  std::size_t max_len = 0;
  for (const auto* r : runs) max_len = std::max(max_len, r->size());
  std::vector<AggregateRow> out;
  out.reserve(max_len);
  for (std::size_t k = 0; k < max_len; ++k) {
    std::vector<double> env_step, avg, window, ep_len;
    for (const auto* r : runs) {
      if (k >= r->size()) continue;
      const LogRow& row = (*r)[k];
      env_step.push_back(static_cast<double>(row.env_step));
      avg.push_back(row.avg_reward);
      window.push_back(row.window_avg_reward_100);
      ep_len.push_back(static_cast<double>(row.episode_length));
    }
    AggregateRow a;
    a.epoch = static_cast<long>(k) + 1;
    a.n_seeds = static_cast<int>(avg.size());
    a.env_step_mean = mean_of(env_step);
    a.avg_reward_mean = mean_of(avg);
    a.avg_reward_std = population_std(avg, a.avg_reward_mean);
    a.window_avg_reward_100_mean = mean_of(window);
    a.window_avg_reward_100_std =
        population_std(window, a.window_avg_reward_100_mean);
    a.episode_length_mean = mean_of(ep_len);
    a.episode_length_std = population_std(ep_len, a.episode_length_mean);
    out.push_back(a);
  }
  return out;
}

std::string run_log_csv(const std::vector<LogRow>& rows) {
  std::ostringstream os;
  os << "env_step,epoch,episode,avg_reward,window_avg_reward_100,"
        "episode_length,epsilon,delta_norm_mean,ifo_cumulative\n";
  for (const LogRow& r : rows) {
    os << fmt(r.env_step) << ',' << fmt(r.epoch) << ',' << fmt(r.episode)
       << ',' << fmt(r.avg_reward) << ',' << fmt(r.window_avg_reward_100)
       << ',' << fmt(r.episode_length) << ',' << fmt(r.epsilon) << ','
       << fmt(r.delta_norm_mean) << ',' << fmt(r.ifo_cumulative) << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "epoch,env_step_mean,n_seeds,avg_reward_mean,avg_reward_std,"
        "window_avg_reward_100_mean,window_avg_reward_100_std,"
        "episode_length_mean,episode_length_std\n";
  for (const AggregateRow& r : rows) {
    os << fmt(r.epoch) << ',' << fmt(r.env_step_mean) << ',' << r.n_seeds
       << ',' << fmt(r.avg_reward_mean) << ',' << fmt(r.avg_reward_std) << ','
       << fmt(r.window_avg_reward_100_mean) << ','
       << fmt(r.window_avg_reward_100_std) << ','
       << fmt(r.episode_length_mean) << ',' << fmt(r.episode_length_std)
       << '\n';
  }
  return os.str();
}

std::string diagnostics_csv_header() {
  return "checkpoint_step,algo,seed,grad_std_sum,anchor_distance_mean\n";
}

std::string diagnostics_csv_rows(const std::vector<DiagRow>& rows,
                                 const std::string& algo, std::uint64_t seed) {
  std::ostringstream os;
  for (const DiagRow& r : rows) {
    os << fmt(r.checkpoint_step) << ',' << algo << ',' << seed << ','
       << fmt(r.grad_std_sum) << ',' << fmt(r.anchor_distance_mean) << '\n';
  }
  return os.str();
}

int run_experiment(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  const std::string task_name = to_string(spec.task);

  struct Cell {
    Algo algo;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Algo algo : spec.algos)
    for (std::uint64_t seed : spec.seeds) cells.push_back({algo, seed});

  std::vector<CellOutcome> outcomes(cells.size());
  std::mutex io_mutex;
  parallel_for(static_cast<int>(cells.size()), spec.jobs, [&](int i) {
    const Cell& cell = cells[static_cast<std::size_t>(i)];
    CellOutcome& out = outcomes[static_cast<std::size_t>(i)];
    try {
      TaskConfig cfg = spec.base;
      cfg.seed = cell.seed;
      out.run = run_training(cfg, cell.algo, spec.task);
      out.ok = true;
      if (!spec.quiet) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << task_name << ' ' << to_string(cell.algo) << " seed "
                  << cell.seed << ": " << out.run.rows.size() << " epochs";
        if (!out.run.rows.empty())
          std::cout << ", avg reward " << fmt(out.run.rows.back().avg_reward);
        std::cout << '\n';
      }
    } catch (const std::exception& e) {
      out.error = e.what();
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cerr << task_name << ' ' << to_string(cell.algo) << " seed "
                << cell.seed << " failed: " << e.what() << '\n';
    }
  });

  // post-pass: per-run files, per-algo aggregates, one diagnostics file
  bool any_failed = false;
  std::ostringstream diag;
  diag << diagnostics_csv_header();
  for (Algo algo : spec.algos) {
    std::vector<const std::vector<LogRow>*> algo_runs;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].algo != algo) continue;
      const CellOutcome& out = outcomes[i];
      if (!out.ok) {
        any_failed = true;
        continue;
      }
      const std::string stem = task_name + "_" + to_string(algo) + "_seed" +
                               std::to_string(cells[i].seed);
      write_file(spec.out_dir / (stem + ".csv"), run_log_csv(out.run.rows));
      save_params(out.run.final_params,
                  spec.out_dir / (stem + "_params.bin"));
      diag << diagnostics_csv_rows(out.run.diag_rows, to_string(algo),
                                   cells[i].seed);
      algo_runs.push_back(&out.run.rows);
    }
    if (!algo_runs.empty()) {
      write_file(
          spec.out_dir / (task_name + "_" + to_string(algo) + "_aggregate.csv"),
          aggregate_csv(aggregate_rows(algo_runs)));
    }
  }
  write_file(spec.out_dir / (task_name + "_diagnostics.csv"), diag.str());
  return any_failed ? 1 : 0;
}

int run_exact_anchor_experiment(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  const std::string task_name = to_string(spec.task);

  struct ArmOutcome {
    bool ok = false;
    std::string error;
    PairedRunLogs pair;
  };
  std::vector<ArmOutcome> outcomes(spec.seeds.size());
  std::mutex io_mutex;
  parallel_for(static_cast<int>(spec.seeds.size()), spec.jobs, [&](int i) {
    const std::uint64_t seed = spec.seeds[static_cast<std::size_t>(i)];
    ArmOutcome& out = outcomes[static_cast<std::size_t>(i)];
    try {
      TaskConfig cfg = spec.base;
      cfg.seed = seed;
      const RunResult original = run_training(cfg, Algo::Svrg, spec.task);
      out.pair = exact_anchor_rerun(original.record, cfg, spec.task);
      out.ok = true;
      if (!spec.quiet) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << task_name << " exact-anchor seed " << seed
                  << ": standard "
                  << fmt(out.pair.standard.rows.empty()
                             ? 0.0
                             : out.pair.standard.rows.back().avg_reward)
                  << ", exact "
                  << fmt(out.pair.exact.rows.empty()
                             ? 0.0
                             : out.pair.exact.rows.back().avg_reward)
                  << '\n';
      }
    } catch (const std::exception& e) {
      out.error = e.what();
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cerr << task_name << " exact-anchor seed " << seed
                << " failed: " << e.what() << '\n';
    }
  });

  bool any_failed = false;
  std::vector<const std::vector<LogRow>*> std_runs, exact_runs;
  std::ostringstream summary;
  summary << "seed,final_avg_reward_standard,final_avg_reward_exact\n";
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
    const ArmOutcome& out = outcomes[i];
    if (!out.ok) {
      any_failed = true;
      continue;
    }
    const std::string seed_str = std::to_string(spec.seeds[i]);
    write_file(
        spec.out_dir / (task_name + "_svrg_standard_seed" + seed_str + ".csv"),
        run_log_csv(out.pair.standard.rows));
    write_file(
        spec.out_dir / (task_name + "_svrg_exact_seed" + seed_str + ".csv"),
        run_log_csv(out.pair.exact.rows));
    summary << seed_str << ','
            << fmt(out.pair.standard.rows.empty()
                       ? 0.0
                       : out.pair.standard.rows.back().avg_reward)
            << ','
            << fmt(out.pair.exact.rows.empty()
                       ? 0.0
                       : out.pair.exact.rows.back().avg_reward)
            << '\n';
    std_runs.push_back(&out.pair.standard.rows);
    exact_runs.push_back(&out.pair.exact.rows);
  }
  if (!std_runs.empty())
    write_file(spec.out_dir / (task_name + "_svrg_standard_aggregate.csv"),
               aggregate_csv(aggregate_rows(std_runs)));
  if (!exact_runs.empty())
    write_file(spec.out_dir / (task_name + "_svrg_exact_aggregate.csv"),
               aggregate_csv(aggregate_rows(exact_runs)));
  write_file(spec.out_dir / (task_name + "_exact_anchor_summary.csv"),
             summary.str());
  return any_failed ? 1 : 0;
}

}  // namespace vrdqn
