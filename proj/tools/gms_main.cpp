#include "gms/fpt.hpp"
#include "gms/girsanov.hpp"
#include "gms/interp.hpp"
#include "gms/io.hpp"
#include "gms/selftest.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using namespace gms;

int default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

// GMS_THREADS wins over --threads when both are given.
void apply_thread_env(int& threads) {
    if (const char* env = std::getenv("GMS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) threads = n;
    }
}

struct CommonOpts {
    std::string model_path;
    std::string out_path;
    std::string format = "csv";
    int depth = 6;
    std::uint64_t seed = 0;
    int threads = default_threads();
    int flow_steps = 256;
    int quad_order = 16;
};

FlowConfig flow_config(const CommonOpts& o) {
    FlowConfig cfg;
    cfg.flow_steps = o.flow_steps;
    cfg.quadrature_order = o.quad_order;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_model = true) {
    if (needs_model)
        cmd->add_option("--model", o.model_path, "model definition JSON")->required();
    cmd->add_option("--depth", o.depth, "expansion depth (levels 0..depth)");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--threads", o.threads, "worker threads (env GMS_THREADS overrides)");
    cmd->add_option("--flow-steps", o.flow_steps, "RK4 sub-steps per unit time");
    cmd->add_option("--quad-order", o.quad_order, "Gauss-Legendre nodes per panel");
    cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void emit(const CommonOpts& o, const CsvTable& table, const std::string& subcommand,
          std::vector<std::pair<std::string, std::string>> manifest) {
    if (o.format == "json")
        write_json_rows(o.out_path, table);
    else
        write_csv(o.out_path, table);
    manifest.emplace_back("format", o.format);
    manifest.emplace_back("out", o.out_path);
    write_manifest(o.out_path, subcommand, manifest);
}

std::shared_ptr<SchauderBasis> build_basis(const CommonOpts& o, int max_level) {
    const ProcessModel model = load_model(o.model_path);
    auto flow = std::make_shared<FlowCache>(model, flow_config(o));
    return std::make_shared<SchauderBasis>(flow, SupportTree::build(std::max(1, max_level)),
                                           max_level, o.threads);
}

int run_basis(const CommonOpts& o, int grid) {
    auto basis = build_basis(o, o.depth);
    const int d = basis->dim(), m = basis->noise_dim();
    CsvTable table;
    table.header = {"n", "k", "t", "i", "j", "psi_ij", "phi_ij"};
    for (const NodeIndex& id : basis->ordered_indices(o.depth)) {
        const BasisElement& el = basis->element(id.n, id.k);
        for (int p = 0; p < grid; ++p) {
            const double t = double(p) / (grid - 1);
            const Mat psi = basis->eval_psi(el, t);
            const Mat phi = basis->eval_phi(el, t);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    table.rows.push_back({std::to_string(id.n), std::to_string(id.k),
                                          format_double(t), std::to_string(i), std::to_string(j),
                                          format_double(psi(i, j)),
                                          format_double(i < m ? phi(i, j) : 0.0)});
        }
    }
    emit(o, table, "basis",
         {{"model", o.model_path}, {"depth", std::to_string(o.depth)},
          {"grid", std::to_string(grid)}});
    return 0;
}

int run_simulate(const CommonOpts& o, std::int64_t n_paths) {
    auto basis = build_basis(o, o.depth);
    std::vector<SamplePath> paths(n_paths);
    const int threads = std::max(1, o.threads);
    auto worker = [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t id = first; id < last; ++id)
            paths[id] = sample_path(*basis, o.depth, o.seed, std::uint64_t(id));
    };
    if (threads == 1 || n_paths < 2) {
        worker(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back(worker, n_paths * w / threads, n_paths * (w + 1) / threads);
        for (auto& th : pool) th.join();
    }
    emit(o, paths_to_table(paths), "simulate",
         {{"model", o.model_path}, {"depth", std::to_string(o.depth)},
          {"paths", std::to_string(n_paths)}, {"seed", std::to_string(o.seed)}});
    return 0;
}

int run_coeffs(const CommonOpts& o, const std::string& in_path) {
    auto basis = build_basis(o, o.depth);
    const CsvTable in = read_csv(in_path);
    const std::vector<Vec> grid = table_to_grid(in, basis->dim(), 0);
    const CoefficientField xi = coefficients(*basis, grid, o.depth);
    CsvTable table;
    table.header = {"n", "k", "i", "xi_i"};
    for (const NodeIndex& id : basis->ordered_indices(o.depth))
        for (int c = 0; c < basis->dim(); ++c)
            table.rows.push_back({std::to_string(id.n), std::to_string(id.k), std::to_string(c),
                                  format_double(xi.at(id.n, id.k)[c])});
    emit(o, table, "coeffs",
         {{"model", o.model_path}, {"in", in_path}, {"depth", std::to_string(o.depth)}});
    return 0;
}

int run_refine(const CommonOpts& o, const std::string& in_path, int levels) {
    const CsvTable in = read_csv(in_path);
    const ProcessModel model = load_model(o.model_path);
    std::vector<double> times;
    const std::vector<Vec> grid = table_to_grid(in, model.d, 0, &times);
    int depth = 0;
    while ((std::size_t(1) << depth) + 1 < grid.size()) ++depth;
    if ((std::size_t(1) << depth) + 1 != grid.size())
        throw InputError("input grid is not a full dyadic grid");

    auto flow = std::make_shared<FlowCache>(model, flow_config(o));
    SchauderBasis basis(flow, SupportTree::build(depth + levels), depth + levels, o.threads);
    SamplePath path;
    path.depth = depth;
    path.times = times;
    path.values = grid;
    path.xi = coefficients(basis, grid, depth);
    for (int i = 0; i < levels; ++i) path = refine_all(basis, path, o.seed);
    emit(o, paths_to_table({path}), "refine",
         {{"model", o.model_path}, {"in", in_path}, {"levels", "+" + std::to_string(levels)},
          {"seed", std::to_string(o.seed)}});
    return 0;
}

int run_interp(const CommonOpts& o, const std::string& data_path, int grid_points) {
    auto basis = build_basis(o, o.depth);
    const CsvTable in = read_csv(data_path);
    InterpolationProblem problem;
    problem.basis = basis.get();
    problem.depth = o.depth;
    problem.data = table_to_grid(in, basis->dim(), 0);
    const Interpolant spline = optimal_interpolant(problem);
    CsvTable table;
    table.header = {"t", "i", "x_i"};
    for (int p = 0; p < grid_points; ++p) {
        const double t = double(p) / (grid_points - 1);
        const Vec x = spline(t);
        for (int i = 0; i < basis->dim(); ++i)
            table.rows.push_back({format_double(t), std::to_string(i), format_double(x[i])});
    }
    emit(o, table, "interp",
         {{"model", o.model_path}, {"data", data_path}, {"depth", std::to_string(o.depth)},
          {"grid", std::to_string(grid_points)}});
    return 0;
}

int run_girsanov(const CommonOpts& o, const std::string& alpha_path,
                 const std::string& beta_path, std::int64_t n_paths) {
    const ProcessModel model_a = load_model(alpha_path);
    const ProcessModel model_b = load_model(beta_path);
    const ModelPair pair = make_model_pair(model_a, model_b, o.depth, flow_config(o));
    const LiftMatrices lift = lift_matrix(pair, o.depth + 1);

    std::vector<RnWeight> weights(n_paths);
    const int threads = std::max(1, o.threads);
    auto worker = [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t id = first; id < last; ++id) {
            const SamplePath path = sample_path(*pair.basis_a, o.depth, o.seed, std::uint64_t(id));
            weights[id] = rn_derivative(pair, lift, path.xi);
        }
    };
    if (threads == 1 || n_paths < 2) {
        worker(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back(worker, n_paths * w / threads, n_paths * (w + 1) / threads);
        for (auto& th : pool) th.join();
    }
    CsvTable table;
    table.header = {"path_id", "log_weight", "weight"};
    for (std::int64_t id = 0; id < n_paths; ++id)
        table.rows.push_back({std::to_string(id), format_double(weights[id].log_weight),
                              format_double(weights[id].weight)});
    emit(o, table, "girsanov",
         {{"alpha", alpha_path}, {"beta", beta_path}, {"depth", std::to_string(o.depth)},
          {"paths", std::to_string(n_paths)}, {"seed", std::to_string(o.seed)}});
    return 0;
}

int run_fpt(const CommonOpts& o, FptQuery query, const std::string& direction) {
    auto basis = build_basis(o, query.max_depth);
    if (!direction.empty()) {
        std::vector<double> comps;
        std::stringstream ss(direction);
        std::string tok;
        while (std::getline(ss, tok, ',')) comps.push_back(std::stod(tok));
        query.direction = Eigen::Map<Vec>(comps.data(), comps.size());
    }
    query.seed = o.seed;
    query.threads = o.threads;
    FptStats stats;
    const std::vector<FptRecord> records = first_passage(*basis, query, &stats);
    CsvTable table;
    table.header = {"path_id", "crossed", "tau_lo", "tau_hi"};
    for (const FptRecord& rec : records)
        table.rows.push_back({std::to_string(rec.path_id), rec.crossed ? "1" : "0",
                              format_double(rec.tau_lo), format_double(rec.tau_hi)});
    emit(o, table, "fpt",
         {{"model", o.model_path}, {"level", format_double(query.level)},
          {"paths", std::to_string(query.paths)}, {"max_depth", std::to_string(query.max_depth)},
          {"seed", std::to_string(o.seed)},
          {"refined_nodes", std::to_string(stats.refined_nodes)},
          {"full_tree_nodes", std::to_string(stats.full_tree_nodes)}});
    return 0;
}

int run_selftest(const CommonOpts& o) {
    const ProcessModel model = load_model(o.model_path);
    const auto checks = selftest(model, o.depth, flow_config(o));
    bool all_pass = true;
    for (const CheckResult& c : checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  (defect "
                  << format_double(c.value) << ", bound " << format_double(c.bound) << ")\n";
        all_pass = all_pass && c.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-resolution expansions of Gauss-Markov processes"};
    app.require_subcommand(1);

    CommonOpts o;
    int grid = 257;
    std::int64_t n_paths = 1;
    std::string in_path, data_path, alpha_path, beta_path, direction;
    std::string partition = "dyadic";
    int levels = 1;
    FptQuery query;

    CLI::App* basis_cmd = app.add_subcommand("basis", "dump psi/phi evaluations to CSV");
    add_common(basis_cmd, o);
    basis_cmd->add_option("--grid", grid, "evaluation grid points");
    basis_cmd->add_option("--out", o.out_path, "output file")->required();

    CLI::App* sim_cmd = app.add_subcommand("simulate", "draw sample paths");
    add_common(sim_cmd, o);
    sim_cmd->add_option("--paths", n_paths, "number of paths");
    sim_cmd->add_option("--out", o.out_path, "output file")->required();
    sim_cmd->add_option("--partition", partition, "partition kind")
        ->check(CLI::IsMember({"dyadic"}));

    CLI::App* coeffs_cmd = app.add_subcommand("coeffs", "path values -> coefficients");
    add_common(coeffs_cmd, o);
    coeffs_cmd->add_option("--in", in_path, "input path CSV")->required();
    coeffs_cmd->add_option("--out", o.out_path, "output file")->required();

    CLI::App* refine_cmd = app.add_subcommand("refine", "conditionally extend a stored path");
    add_common(refine_cmd, o);
    refine_cmd->add_option("--in", in_path, "input path CSV")->required();
    refine_cmd->add_option("--levels", levels, "levels to add (+k)");
    refine_cmd->add_option("--out", o.out_path, "output file")->required();

    CLI::App* interp_cmd = app.add_subcommand("interp", "energy-optimal interpolation");
    add_common(interp_cmd, o);
    interp_cmd->add_option("--data", data_path, "data CSV on the dyadic grid")->required();
    interp_cmd->add_option("--grid", grid, "output grid points");
    interp_cmd->add_option("--out", o.out_path, "output file")->required();

    CLI::App* girs_cmd = app.add_subcommand("girsanov", "finite-dimensional likelihood ratios");
    add_common(girs_cmd, o, false);
    girs_cmd->add_option("--alpha", alpha_path, "sampling model JSON")->required();
    girs_cmd->add_option("--beta", beta_path, "target model JSON")->required();
    girs_cmd->add_option("--paths", n_paths, "number of paths");
    girs_cmd->add_option("--out", o.out_path, "output file")->required();

    CLI::App* fpt_cmd = app.add_subcommand("fpt", "dichotomic first-passage search");
    add_common(fpt_cmd, o);
    fpt_cmd->add_option("--level", query.level, "boundary level");
    fpt_cmd->add_option("--direction", direction, "half-space normal (comma separated)");
    fpt_cmd->add_option("--paths", query.paths, "number of paths");
    fpt_cmd->add_option("--max-depth", query.max_depth, "finest refinement level");
    fpt_cmd->add_option("--coarse-depth", query.coarse_depth, "initial simulation level");
    fpt_cmd->add_option("--p-low", query.p_low, "prune threshold");
    fpt_cmd->add_option("--p-high", query.p_high, "certain-crossing threshold");
    fpt_cmd->add_option("--out", o.out_path, "output file")->required();

    CLI::App* self_cmd = app.add_subcommand("selftest", "run the analytic-identity suite");
    add_common(self_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    apply_thread_env(o.threads);
    if (grid < 2) {
        std::cerr << "gms: --grid needs at least two points\n";
        return 2;
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (basis_cmd->parsed()) return run_basis(o, grid);
        if (sim_cmd->parsed()) return run_simulate(o, n_paths);
        if (coeffs_cmd->parsed()) return run_coeffs(o, in_path);
        if (refine_cmd->parsed()) return run_refine(o, in_path, levels);
        if (interp_cmd->parsed()) return run_interp(o, data_path, grid);
        if (girs_cmd->parsed()) return run_girsanov(o, alpha_path, beta_path, n_paths);
        if (fpt_cmd->parsed()) return run_fpt(o, query, direction);
        if (self_cmd->parsed()) return run_selftest(o);
    } catch (const InputError& e) {
        std::cerr << "gms " << stage << ": input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "gms " << stage << ": " << e.what() << "\n";
        return 1;
    }
    return 2;
}
