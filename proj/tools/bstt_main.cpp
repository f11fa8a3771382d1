#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bstt/block_structure.hpp"
#include "bstt/experiments.hpp"

namespace {

using namespace bstt;

// split on commas at parenthesis depth zero: descriptors carry commas themselves
std::vector<SpaceDescriptor> parse_spaces(const std::string& text) {
    std::vector<SpaceDescriptor> spaces;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            spaces.push_back(SpaceDescriptor::parse(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) spaces.push_back(SpaceDescriptor::parse(cur));
    if (spaces.empty()) throw std::invalid_argument("no space descriptors given");
    return spaces;
}

FitOptions load_options(const std::string& path) {
    if (path.empty()) return FitOptions{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open options file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return FitOptions::from_json(j);
}

void print_study(const StudyResult& result) {
    for (const auto& [space, dof] : result.dof_lines) {
        std::cout << "dof " << space << " = " << dof;
        if (auto note = dof_convention_note(SpaceDescriptor::parse(space)))
            std::cout << "   [" << *note << "]";
        std::cout << "\n";
    }
    for (const auto& q : result.quantiles) {
        std::printf("%s M=%d: q15 %.6e  median %.6e  q85 %.6e\n", q.space.c_str(), q.sample_size,
                    q.q15, q.median, q.q85);
    }
}

struct StudyArgs {
    std::string spaces;
    std::vector<int> samples;
    int trials = 20;
    std::uint64_t seed = 0;
    int test_samples = 1000;
    std::string out = "study";
    std::string opts_path;
    std::string dump_prefix;
    bool timing = false;
};

void add_study_flags(CLI::App* cmd, StudyArgs& a) {
    cmd->add_option("--space", a.spaces, "comma-separated space descriptors");
    cmd->add_option("--samples", a.samples, "sample sizes, strictly increasing")
        ->delimiter(',')
        ->required();
    cmd->add_option("--trials", a.trials, "trials per sample size");
    cmd->add_option("--seed", a.seed, "base seed for the trial-splitting rule");
    cmd->add_option("--test-samples", a.test_samples, "fresh test points per trial");
    cmd->add_option("--out", a.out, "output prefix for <out>.jsonl and <out>.csv");
    cmd->add_option("--opts", a.opts_path, "solver options JSON file");
    cmd->add_option("--dump", a.dump_prefix, "dump per-trial train/test sample CSVs");
    cmd->add_flag("--timing", a.timing,
                  "record wall-clock seconds per trial (output is no longer byte-reproducible)");
}

ExperimentConfig to_config(const StudyArgs& a, const std::string& problem) {
    ExperimentConfig cfg;
    cfg.problem = problem;
    cfg.spaces = parse_spaces(a.spaces);
    cfg.sample_sizes = a.samples;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.test_samples = a.test_samples;
    cfg.options = load_options(a.opts_path);
    cfg.timing = a.timing;
    cfg.dump_prefix = a.dump_prefix;
    return cfg;
}

int run(int argc, char** argv) {
    CLI::App app{"block-sparse tensor-train regression for homogeneous polynomial spaces"};
    app.require_subcommand(1);
    bool serial = false;
    app.add_flag("--serial", serial, "disable the OpenMP kernels");

    auto* riccati = app.add_subcommand("riccati", "value-function recovery study (heat equation LQR)");
    StudyArgs ra;
    ra.spaces = "W(d=8,g=2),B(rho=4;W(d=8,g=2))";
    ra.out = "riccati_study";
    add_study_flags(riccati, ra);
    double control_penalty = 1.0;
    riccati->add_option("--control-penalty", control_penalty, "control weight in the LQR cost");

    auto* gaussian = app.add_subcommand("gaussian", "Gaussian density recovery study");
    StudyArgs ga;
    ga.spaces = "S(d=6,g=7,rho=1)";
    ga.out = "gaussian_study";
    add_study_flags(gaussian, ga);

    auto* ingest = app.add_subcommand("ingest-fit", "fit one space to samples from a file");
    std::string in_path, format = "csv", space_text, test_path, report_path, ingest_opts;
    std::uint64_t ingest_seed = 0;
    ingest->add_option("--in", in_path, "sample file with header x_1,...,x_d,y")->required();
    ingest->add_option("--format", format, "csv or json");
    ingest->add_option("--space", space_text, "space descriptor")->required();
    ingest->add_option("--test", test_path, "held-out sample file for the test error");
    ingest->add_option("--opts", ingest_opts, "solver options JSON file");
    ingest->add_option("--seed", ingest_seed, "initialization seed");
    ingest->add_option("--out", report_path, "write the fit report JSON here");
    std::string ingest_dict = "legendre";
    ingest->add_option("--dictionary", ingest_dict, "monomial or legendre");

    auto* dof = app.add_subcommand("dof", "degrees of freedom of ansatz spaces");
    std::string dof_spaces;
    dof->add_option("--space", dof_spaces, "comma-separated space descriptors")->required();

    auto* bounds = app.add_subcommand("bounds", "block-size bound tables per interface");
    int bd = 0, bg = 0, brho = 0, bkloc = 0;
    bool baug = false;
    bounds->add_option("--d", bd, "order")->required();
    bounds->add_option("--g", bg, "total degree")->required();
    bounds->add_option("--rho", brho, "cap the sizes at rho");
    bounds->add_option("--kloc", bkloc, "apply the variable-locality bound");
    bounds->add_flag("--aug", baug, "augmented order-(d+1) structure");

    auto* emit = app.add_subcommand("study-emit", "re-aggregate a records file into quantile CSV");
    std::string emit_in, emit_out;
    emit->add_option("--in", emit_in, "records JSONL")->required();
    emit->add_option("--out", emit_out, "output prefix")->required();

    CLI11_PARSE(app, argc, argv);
    if (serial) parallel::set_mode(ExecutionMode::Serial);

    if (*riccati) {
        ExperimentConfig cfg = to_config(ra, "riccati");
        cfg.control_penalty = control_penalty;
        StudyResult result = run_riccati_study(cfg);
        print_study(result);
        emit_study(result, ra.out);
        std::cout << "wrote " << ra.out << ".jsonl and " << ra.out << ".csv\n";
    } else if (*gaussian) {
        StudyResult result = run_gaussian_study(to_config(ga, "gaussian"));
        print_study(result);
        emit_study(result, ga.out);
        std::cout << "wrote " << ga.out << ".jsonl and " << ga.out << ".csv\n";
    } else if (*ingest) {
        SpaceDescriptor space = SpaceDescriptor::parse(space_text);
        Dictionary dict = dictionary_by_name(ingest_dict, space.p);
        SampleSet train = ingest_samples(in_path, format, dict);
        std::optional<SampleSet> test;
        if (!test_path.empty()) test.emplace(ingest_samples(test_path, format, dict));
        FitOptions options = load_options(ingest_opts);
        if (ingest_seed != 0) options.seed = ingest_seed;
        IngestFitResult result = ingest_fit(train, test, space, options);
        std::printf("train residual %.6e\n", result.train_residual);
        if (test) std::printf("test error %.6e\n", result.test_error);
        if (!report_path.empty()) {
            nlohmann::json j = result.report;
            j["space"] = space.str();
            std::ofstream out(report_path, std::ios::binary);
            out << j.dump(2) << "\n";
            std::cout << "wrote " << report_path << "\n";
        }
    } else if (*dof) {
        for (const auto& space : parse_spaces(dof_spaces)) {
            std::cout << space.str() << " " << dof_count(space);
            if (auto note = dof_convention_note(space)) std::cout << "   [" << *note << "]";
            std::cout << "\n";
        }
    } else if (*bounds) {
        BlockStructure bs = baug
                                ? build_augmented(bd, bg, brho > 0 ? brho : INT32_MAX)
                                : build_block_structure(bd, bg, brho > 0 ? brho : INT32_MAX,
                                                        bkloc > 0 ? std::optional<int>(bkloc)
                                                                  : std::nullopt);
        std::cout << "interface";
        for (int gt = 0; gt <= bs.degree(); ++gt) std::cout << "\tg" << gt;
        std::cout << "\trank\n";
        for (int k = 0; k <= bs.order(); ++k) {
            std::cout << k;
            for (int gt = 0; gt <= bs.degree(); ++gt) std::cout << "\t" << bs.group_size(k, gt);
            std::cout << "\t" << bs.rank(k) << "\n";
        }
        std::cout << "allowed entries: " << pattern_size(bs) << "\n";
        if (bkloc > 0 && !baug) {
            std::cout << "locality bounds (K_loc=" << bkloc << "):";
            for (int gt = 0; gt <= bg; ++gt) std::cout << " " << local_rank_bound(bg, gt, bkloc);
            std::cout << "\n";
        }
    } else if (*emit) {
        StudyResult result = aggregate_records(read_records_jsonl(emit_in));
        emit_study(result, emit_out);
        print_study(result);
        std::cout << "wrote " << emit_out << ".jsonl and " << emit_out << ".csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
