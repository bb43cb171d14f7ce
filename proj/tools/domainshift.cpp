/*
 * Copyright 2026 The domainshift Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: bench, train, decompose, check, gen, print-config.

#include "checks/acceptance.hpp"
#include "domainshift/csd/decompose.hpp"
#include "domainshift/error.hpp"
#include "domainshift/harness/bench.hpp"
#include "domainshift/harness/config.hpp"
#include "domainshift/harness/csv.hpp"
#include "oracles/oracles.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace domainshift;

namespace
{

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

/// Shared flags. Unset flags fall back to the config file, then defaults.
struct CommonFlags
{
    std::string config;
    int seeds = 0;
    std::string out;
    int threads = -1;
    double tolerance_scale = 0.0;
};

void add_common(CLI::App* app, CommonFlags& f)
{
    app->add_option("--config", f.config, "YAML experiment config");
    app->add_option("--seeds", f.seeds, "Number of seeds (0, 1, ..., N-1)")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--threads", f.threads, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--tolerance-scale", f.tolerance_scale,
                    "Multiplier on every tolerance band")
        ->check(CLI::PositiveNumber);
}

/// Config file, then DOMAINSHIFT_SEED, then explicit flags.
ExperimentConfig resolve(const CommonFlags& f)
{
    ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
    apply_seed_override(cfg, std::getenv(kSeedEnv));
    if (f.seeds > 0)
    {
        cfg.seeds.clear();
        for (int s = 0; s < f.seeds; ++s)
        {
            cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (!f.out.empty())
    {
        cfg.output = f.out;
    }
    if (f.threads >= 0)
    {
        cfg.threads = f.threads;
    }
    if (f.tolerance_scale > 0.0)
    {
        cfg.tolerance_scale = f.tolerance_scale;
    }
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const fs::path& path)
{
    std::error_code ec;
    if (path.has_parent_path())
    {
        fs::create_directories(path.parent_path(), ec);
        if (ec)
        {
            throw std::runtime_error(
                fmt::format("cannot create directory '{}': {}", path.parent_path().string(),
                            ec.message()));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    }
    return out;
}

void close_output(std::ofstream& out, const fs::path& path)
{
    out.close();
    if (!out)
    {
        throw std::runtime_error(fmt::format("error writing '{}'", path.string()));
    }
}

int print_checks(const std::vector<Check>& checks)
{
    int passed = 0;
    for (const Check& c : checks)
    {
        fmt::print("{}\n", format_check(c));
        passed += c.passed ? 1 : 0;
    }
    fmt::print("summary: {}/{} checks pass\n", passed, checks.size());
    return passed == static_cast<int>(checks.size()) ? 0 : kExitFail;
}

int cmd_bench(const std::string& name, const CommonFlags& flags)
{
    const ExperimentConfig cfg = resolve(flags);
    BenchOptions opt;
    opt.seeds = cfg.seeds;
    opt.threads = cfg.threads;
    opt.tolerance_scale = cfg.tolerance_scale;
    opt.exec = cfg.train.exec;

    std::vector<std::string> names;
    if (name == "all")
    {
        names = {"toy-table", "convergence", "decomposition"};
    }
    else if (name == "toy-table" || name == "convergence" || name == "decomposition")
    {
        names = {name};
    }
    else
    {
        throw ConfigError(fmt::format("unknown benchmark '{}'", name));
    }

    std::vector<Check> all;
    for (const std::string& n : names)
    {
        const fs::path path = fs::path(cfg.output) / (n + ".csv");
        std::ofstream file = open_output(path);
        CsvWriter csv(file);
        std::vector<Check> checks;
        if (n == "toy-table")
        {
            const ToyTableResult r = run_toy_table(opt, &csv);
            for (const MetricsReport& c : r.cells)
            {
                fmt::print("{:<16} {:<10} worst loss {:.4f} ({:.4f})  train macro {:.4f} "
                           "({:.4f})  variance {:.4f}\n",
                           c.task, c.algorithm, c.worst_domain_loss.mean,
                           c.worst_domain_loss.std, c.train_macro_loss.mean,
                           c.train_macro_loss.std, c.solution_variance);
            }
            checks = r.checks;
        }
        else if (n == "convergence")
        {
            checks = run_convergence(cfg.seeds.front(), 0.05, &csv).checks;
        }
        else
        {
            checks = run_decomposition(
                         cfg.seeds.front(),
                         [](const Eigen::MatrixXd& W, int k) {
                             return oracles::decomposition_min(W, k);
                         },
                         &csv)
                         .checks;
        }
        close_output(file, path);
        all.insert(all.end(), checks.begin(), checks.end());
    }
    return print_checks(all);
}

int cmd_train(const CommonFlags& flags)
{
    const ExperimentConfig cfg = resolve(flags);
    const fs::path path = fs::path(cfg.output) / "metrics.csv";
    std::ofstream file = open_output(path);
    CsvWriter csv(file);
    const MetricsReport r = run_experiment(cfg, &csv);
    close_output(file, path);
    fmt::print("task {} algorithm {} seeds {}\n", r.task, r.algorithm, r.runs.size());
    for (std::size_t d = 0; d < r.test_loss.size(); ++d)
    {
        fmt::print("  domain {} test loss {:.4f} accuracy {:.4f}\n", d, r.test_loss[d],
                   r.test_accuracy[d]);
    }
    fmt::print("worst-domain loss {:.4f} ({:.4f})  macro loss {:.4f}  worst accuracy "
               "{:.4f}  average accuracy {:.4f}  train macro {:.4f}\n",
               r.worst_domain_loss.mean, r.worst_domain_loss.std, r.macro_loss.mean,
               r.worst_accuracy.mean, r.average_accuracy.mean, r.train_macro_loss.mean);
    if (r.runs.size() >= 2)
    {
        fmt::print("solution variance {:.4f}\n", r.solution_variance);
    }
    fmt::print("wrote {}\n", path.string());
    return 0;
}

Eigen::MatrixXd read_matrix(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error(fmt::format("cannot open matrix file '{}'", path));
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        while (ss >> tok)
        {
            try
            {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size())
                {
                    throw std::invalid_argument(tok);
                }
            }
            catch (const std::exception&)
            {
                throw DataError(fmt::format("{}:{}: not a number: '{}'", path, line_no, tok));
            }
        }
        if (row.empty())
        {
            continue;
        }
        if (!rows.empty() && row.size() != rows.front().size())
        {
            throw DataError(fmt::format("{}:{}: expected {} columns, found {}", path, line_no,
                                        rows.front().size(), row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
    {
        throw DataError(fmt::format("{}: no matrix rows", path));
    }
    Eigen::MatrixXd W(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < W.cols(); ++c)
        {
            W(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    }
    return W;
}

int cmd_decompose(const std::string& matrix, int k)
{
    const Eigen::MatrixXd W = read_matrix(matrix);
    const Decomposition d = svd_decompose(W, k);
    const Eigen::IOFormat fmt_row(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
    std::ostringstream os;
    os << "W (" << W.rows() << " x " << W.cols() << "), k = " << k << "\n";
    os << "w_c:\n" << d.w_c.transpose().format(fmt_row) << "\n";
    os << "W_s:\n" << d.W_s.format(fmt_row) << "\n";
    os << "Gamma:\n" << d.Gamma.format(fmt_row) << "\n";
    std::cout << os.str();
    fmt::print("objective {:.6g}\n", decomposition_objective(W, d));
    if (d.non_unique)
    {
        fmt::print("warning: {}\n", d.warning);
    }
    return 0;
}

int cmd_check(const CommonFlags& flags)
{
    const ExperimentConfig cfg = resolve(flags);
    checks::AcceptanceOptions opt;
    opt.seeds = cfg.seeds;
    opt.threads = cfg.threads;
    opt.tolerance_scale = cfg.tolerance_scale;
    bool ok = true;
    checks::run_acceptance(opt, [&](const checks::CriterionResult& r) {
        fmt::print("{}\n", checks::format_criterion(r));
        std::fflush(stdout);
        ok = ok && r.passed;
    });
    return ok ? 0 : kExitFail;
}

int cmd_gen(const CommonFlags& flags, const std::string& task_name)
{
    ExperimentConfig cfg = resolve(flags);
    if (!task_name.empty())
    {
        cfg.task.kind = parse_task(task_name);
    }
    const std::uint64_t seed = cfg.seeds.front();
    const TaskData data = make_task(cfg.task_for(seed));
    for (const auto& [split, set] :
         {std::pair<const char*, const DomainDataset*>{"train", &data.train},
          {"test", &data.test}})
    {
        const fs::path path =
            fs::path(cfg.output) / fmt::format("{}-{}-{}.csv", to_string(cfg.task.kind), seed, split);
        std::ofstream file = open_output(path);
        write_dataset_csv(file, *set);
        close_output(file, path);
        fmt::print("wrote {}\n", path.string());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Domain-shift robust training and decomposition toolkit"};
    app.require_subcommand(1);

    CommonFlags bench_flags, train_flags, check_flags, gen_flags, print_flags;
    std::string bench_name = "all";
    auto* bench = app.add_subcommand("bench", "Reproduce the reference tables");
    bench->add_option("name", bench_name, "toy-table, convergence, decomposition or all");
    add_common(bench, bench_flags);

    auto* train = app.add_subcommand("train", "Run one experiment config");
    add_common(train, train_flags);

    std::string matrix;
    int k = 1;
    auto* decompose = app.add_subcommand("decompose", "Decompose a classifier matrix");
    decompose->add_option("matrix", matrix, "Text matrix, one row per feature")->required();
    decompose->add_option("-k,--rank", k, "Number of specific components");

    auto* check = app.add_subcommand("check", "Run every acceptance criterion");
    add_common(check, check_flags);

    std::string task_name;
    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    gen->add_option("--task", task_name,
                    "dg-example, noise-simple, rotation-simple or spurious-simple");
    add_common(gen, gen_flags);

    auto* print = app.add_subcommand("print-config", "Print the effective config");
    add_common(print, print_flags);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kExitConfig;
    }

    try
    {
        if (bench->parsed()) return cmd_bench(bench_name, bench_flags);
        if (train->parsed()) return cmd_train(train_flags);
        if (decompose->parsed()) return cmd_decompose(matrix, k);
        if (check->parsed()) return cmd_check(check_flags);
        if (gen->parsed()) return cmd_gen(gen_flags, task_name);
        if (print->parsed())
        {
            fmt::print("{}", dump_config(resolve(print_flags)));
            return 0;
        }
    }
    catch (const ConfigError& e)
    {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    }
    catch (const std::exception& e)
    {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitFail;
    }
    return kExitFail;
}
