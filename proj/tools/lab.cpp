// lab: declarative scenario runner for the lorlab experiment suite.
//
//   lab run <config...|dir> [--jobs N] [--seed S] [--out-dir D]
//   lab regress <new.csv> <baseline.csv> [--tol-file tolerances.json]
//   lab list-experiments
//
// Exit codes: 0 pass, 1 experiment failure, 2 config error.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lorlab/csv.hpp"
#include "lorlab/scenario.hpp"

namespace fs = std::filesystem;

static std::vector<std::string> collect_configs(
    const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".cfg" ||
                    e.path().extension() == ".json")
                    out.push_back(e.path().string());
            std::sort(out.begin(), out.end());
        } else {
            out.push_back(in);
        }
    }
    return out;
}

int main(int argc, char** argv) {
    CLI::App app{"lorlab scenario runner"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run scenario configs");
    std::vector<std::string> inputs;
    int jobs = 1;
    std::string out_dir = ".";
    unsigned long seed = 0;
    bool seed_set = false;
    run->add_option("configs", inputs, "config files or a directory")
        ->required();
    run->add_option("--jobs", jobs, "parallel scenarios");
    run->add_option("--out-dir", out_dir, "output directory");
    auto* seed_opt = run->add_option("--seed", seed, "seed override");
    run->callback([&] { seed_set = seed_opt->count() > 0; });

    auto* regress = app.add_subcommand("regress", "compare a table against a baseline");
    std::string new_path, base_path, tol_file;
    regress->add_option("new", new_path, "freshly produced CSV")->required();
    regress->add_option("baseline", base_path, "baseline CSV")->required();
    regress->add_option("--tol-file", tol_file,
                        "JSON map column -> relative tolerance");

    auto* list = app.add_subcommand("list-experiments", "print experiment ids");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& [id, fn] : lorlab::experiment_table())
            std::cout << id << "\n";
        return 0;
    }

    if (regress->parsed()) {
        try {
            std::map<std::string, double> tols;
            if (!tol_file.empty()) {
                std::ifstream f(tol_file);
                if (!f) {
                    std::cerr << "cannot open tol file: " << tol_file << "\n";
                    return 2;
                }
                nlohmann::json j;
                f >> j;
                for (auto it = j.begin(); it != j.end(); ++it)
                    tols[it.key()] = it.value().get<double>();
            }
            lorlab::CsvTable fresh = lorlab::CsvTable::read(new_path);
            lorlab::CsvTable base = lorlab::CsvTable::read(base_path);
            lorlab::RegressionReport rep =
                lorlab::regression_compare(fresh, base, tols);
            for (const auto& f : rep.failures) std::cerr << "FAIL " << f << "\n";
            std::cout << (rep.pass ? "pass" : "fail") << "\n";
            return rep.pass ? 0 : 1;
        } catch (const lorlab::SchemaMismatch& e) {
            std::cerr << "schema mismatch: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }

    // run
    std::vector<std::string> configs = collect_configs(inputs);
    if (configs.empty()) {
        std::cerr << "no configs found\n";
        return 2;
    }
    fs::create_directories(out_dir);
    lorlab::RunOptions opts;
    opts.out_dir = out_dir;
    if (seed_set) opts.seed_override = seed;

    std::atomic<int> worst{0};
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) break;
            std::string msg;
            int rc = lorlab::run_scenario(configs[i], opts, &msg);
            {
                std::lock_guard<std::mutex> lk(io);
                std::cout << configs[i] << ": "
                          << (rc == 0 ? "ok" : rc == 1 ? "FAILED" : "CONFIG ERROR")
                          << " (" << msg << ")\n";
            }
            int cur = worst.load();
            while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {
            }
        }
    };
    std::vector<std::thread> pool;
    int n_threads = std::max(1, std::min<int>(jobs, (int)configs.size()));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return worst.load();
}
