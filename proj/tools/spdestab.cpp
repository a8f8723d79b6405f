// spdestab: run scenarios, raw ensembles, sweeps and criterion checks.
//
// exit codes: 0 consistent / satisfied, 1 inconsistent / not satisfied,
// 2 inconclusive / inapplicable, 64 usage, 65 bad config, 70 internal.

#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "report_io.hpp"
#include "spdestab/config.hpp"
#include "spdestab/criteria.hpp"
#include "spdestab/scenarios.hpp"

namespace fs = std::filesystem;
using namespace spdestab;

namespace {

constexpr int kUsage = 64;
constexpr int kBadConfig = 65;
constexpr int kInternal = 70;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(Outcome o) {
    switch (o) {
        case Outcome::consistent:
            return 0;
        case Outcome::inconsistent:
            return 1;
        case Outcome::inconclusive:
            return 2;
    }
    return kInternal;
}

void print_catalog(std::ostream& os) {
    for (const auto& s : scenario_catalog()) os << fmt::format("  {:<20} {:<10} {}\n", s.name, s.theorems, s.summary);
}

const ScenarioInfo& lookup(const std::string& name) {
    const auto* info = find_scenario(name);
    if (!info) {
        std::cerr << "unknown scenario '" << name << "'; available:\n";
        print_catalog(std::cerr);
        throw UsageError("unknown scenario");
    }
    return *info;
}

struct Inputs {
    Assignments assignments;
    std::string seed_source = "config";
};

/// Config files in order, then --set overrides in order, then SPDE_STAB_SEED.
Inputs gather(const std::vector<std::string>& config_paths, const std::vector<std::string>& sets) {
    Inputs in;
    for (const auto& path : config_paths) {
        const auto a = read_config_file(path);
        in.assignments.insert(in.assignments.end(), a.begin(), a.end());
    }
    for (const auto& s : sets) in.assignments.push_back(parse_assignment(s, "--set"));
    if (const char* env = std::getenv("SPDE_STAB_SEED"); env && *env) {
        const double v = parse_number("SPDE_STAB_SEED", env);
        if (v < 0.0 || v != std::floor(v) || v > 9.0e15)
            throw ConfigError("SPDE_STAB_SEED", std::string("must be a non-negative integer, got '") + env + "'");
        in.assignments.emplace_back("run.seed", env);
        in.seed_source = "env:SPDE_STAB_SEED";
    }
    return in;
}

unsigned resolve_jobs(unsigned jobs) {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
}

void write_manifest(const fs::path& dir, io::RunManifest m) {
    m.finished = io::utc_now();
    io::write_text(dir / "manifest.json", io::to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_scenario(const std::string& name, const std::vector<std::string>& config_path, const std::vector<std::string>& sets,
                 const fs::path& out, unsigned jobs, const std::string& cmdline) {
    io::RunManifest man;
    man.started = io::utc_now();
    const auto& info = lookup(name);
    const auto in = gather(config_path, sets);
    const Config cfg = resolve_config(info.schema(), in.assignments);
    man.command = cmdline;
    man.config_hash = io::sha256_hex("scenario=" + name + "\n" + cfg.canonical_text());
    man.seed = cfg.seed();
    man.seed_source = in.seed_source;
    man.scenarios = {name};
    man.jobs = jobs;

    const auto rep = run_scenario(info, cfg, jobs);
    fs::create_directories(out);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < rep.series.size(); ++i) {
        const std::string file = i == 0 ? name + ".csv" : name + "_" + rep.series[i].name + ".csv";
        io::write_text(out / file, io::to_csv(rep.series[i]));
        files.push_back(file);
    }
    const std::string json_file = name + ".json";
    io::write_text(out / json_file, io::to_json(rep, files).dump(2) + "\n");
    man.outputs = {(out / json_file).string()};
    for (const auto& f : files) man.outputs.push_back((out / f).string());
    write_manifest(out, man);

    std::cout << fmt::format("{}: {}\n", name, outcome_name(rep.verdict));
    for (const auto& c : rep.checks)
        std::cout << fmt::format("  {:<34} {:>12.6g} {:>2} {:<12.6g} {}{}\n", c.name, c.measured,
                                 relation_symbol(c.relation), c.threshold, c.passed ? "pass" : "FAIL",
                                 c.drives_verdict ? (!c.resolved ? " (unresolved)" : c.hypothesis_holds ? "" : " (hypothesis not met)") : " (info)");
    std::cout << "report: " << (out / json_file).string() << "\n";
    return exit_code(rep.verdict);
}

int cmd_simulate(const std::vector<std::string>& config_path, const std::vector<std::string>& sets, const fs::path& out,
                 unsigned jobs, const std::string& cmdline) {
    io::RunManifest man;
    man.started = io::utc_now();
    const auto in = gather(config_path, sets);
    const Config cfg = resolve_config(simulation_schema(), in.assignments);
    man.command = cmdline;
    man.config_hash = io::sha256_hex("simulate\n" + cfg.canonical_text());
    man.seed = cfg.seed();
    man.seed_source = in.seed_source;
    man.jobs = jobs;

    const auto table = run_simulation(cfg, jobs);
    fs::create_directories(out);
    io::write_text(out / "simulate.csv", io::to_csv(table));
    man.outputs = {(out / "simulate.csv").string()};
    write_manifest(out, man);
    std::cout << "wrote " << (out / "simulate.csv").string() << "\n";
    return 0;
}

struct Axis {
    std::string key;
    std::vector<std::string> values;
};

Axis parse_axis(const std::string& spec, const Schema& schema) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--axis expects key=v1,v2,... or key=lo:hi:n, got '" + spec + "'");
    Axis a;
    a.key = detail::resolve_key(schema, std::string(detail::trim(spec.substr(0, eq)))).key;
    const std::string body = spec.substr(eq + 1);
    if (std::count(body.begin(), body.end(), ':') == 2) {
        const auto c1 = body.find(':'), c2 = body.rfind(':');
        const double lo = parse_number(a.key, body.substr(0, c1));
        const double hi = parse_number(a.key, body.substr(c1 + 1, c2 - c1 - 1));
        const double n = parse_number(a.key, body.substr(c2 + 1));
        if (n < 1.0 || n != std::floor(n) || n > 1e4) throw ConfigError(a.key, "axis point count must be an integer in [1, 10000]");
        for (long i = 0; i < static_cast<long>(n); ++i)
            a.values.push_back(io::csv_number(n == 1.0 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1.0)));
    } else {
        std::size_t pos = 0;
        while (pos <= body.size()) {
            const auto comma = body.find(',', pos);
            const auto item = detail::trim(std::string_view(body).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (item.empty()) throw ConfigError(a.key, "empty axis value");
            a.values.emplace_back(item);
            pos = comma == std::string::npos ? body.size() + 1 : comma + 1;
        }
    }
    return a;
}

int cmd_sweep(const std::string& name, const std::vector<std::string>& config_path, const std::vector<std::string>& sets,
              const std::vector<std::string>& axis_specs, const fs::path& out, unsigned jobs,
              const std::string& cmdline) {
    io::RunManifest man;
    man.started = io::utc_now();
    const auto& info = lookup(name);
    if (axis_specs.empty() || axis_specs.size() > 2) throw UsageError("sweep takes one or two --axis options");
    const auto schema = info.schema();
    std::vector<Axis> axes;
    for (const auto& s : axis_specs) axes.push_back(parse_axis(s, schema));
    if (axes.size() == 2 && axes[0].key == axes[1].key) throw UsageError("sweep axes must differ");
    const auto in = gather(config_path, sets);
    const Config base = resolve_config(schema, in.assignments);
    std::string hash_input = "sweep=" + name + "\n" + base.canonical_text();
    for (const auto& a : axes) {
        hash_input += "axis " + a.key + "=";
        for (const auto& v : a.values) hash_input += v + ",";
        hash_input += "\n";
    }
    man.command = cmdline;
    man.config_hash = io::sha256_hex(hash_input);
    man.seed = base.seed();
    man.seed_source = in.seed_source;
    man.scenarios = {name};
    man.jobs = jobs;

    std::string csv;
    for (const auto& a : axes) csv += a.key + ",";
    csv += "criterion,lhs,rhs,satisfied,measured_rate,verdict\n";
    const std::size_t n0 = axes[0].values.size(), n1 = axes.size() == 2 ? axes[1].values.size() : 1;
    bool any_inconsistent = false;
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
            Assignments point = in.assignments;
            point.emplace_back(axes[0].key, axes[0].values[i]);
            if (axes.size() == 2) point.emplace_back(axes[1].key, axes[1].values[j]);
            const auto rep = run_scenario(info, resolve_config(schema, point), jobs);
            for (std::size_t k = 0; k < axes.size(); ++k) {
                const auto& key = axes[k].key;
                csv += (rep.config.numbers().count(key) ? io::csv_number(rep.config.num(key)) : rep.config.text(key)) + ",";
            }
            const auto& crit = rep.criteria.front();
            csv += crit.theorem + ":" + crit.primary().name + "," + io::csv_number(crit.lhs()) + "," +
                   io::csv_number(crit.rhs()) + "," + (crit.satisfied() ? "1" : "0") + ",";
            csv += io::csv_number(rep.value("measured_rate").value_or(std::numeric_limits<double>::quiet_NaN())) + ",";
            csv += std::string(outcome_name(rep.verdict)) + "\n";
            any_inconsistent = any_inconsistent || rep.verdict == Outcome::inconsistent;
            std::cout << fmt::format("point {}/{}: {}\n", i * n1 + j + 1, n0 * n1, outcome_name(rep.verdict));
        }
    fs::create_directories(out);
    io::write_text(out / (name + "_sweep.csv"), csv);
    man.outputs = {(out / (name + "_sweep.csv")).string()};
    write_manifest(out, man);
    std::cout << "wrote " << man.outputs.front() << "\n";
    return any_inconsistent ? 1 : 0;
}

// ---------------------------------------------------------------------------
// check

using detail::num_param;

struct CheckTag {
    const char* tag;
    Schema (*schema)();
    CriterionReport (*run)(const Config&);
};

const double kPi2 = std::numbers::pi * std::numbers::pi;

const std::vector<CheckTag>& check_tags() {
    static const std::vector<CheckTag> tags{
        {"t01",
         [] {
             return Schema{num_param("sigma", 0.3, Constraint::nonnegative), num_param("D", 1.0, Constraint::positive),
                           num_param("mu", 1.0, Constraint::positive), num_param("lambda1", kPi2, Constraint::positive),
                           num_param("ms_u0", 1.0, Constraint::nonnegative)};
         },
         [](const Config& c) { return t01_check(c.num("sigma"), c.num("D"), c.num("mu"), c.num("lambda1"), c.num("ms_u0")); }},
        {"t31",
         [] {
             return Schema{num_param("a", -1.0), num_param("b", 1.0), num_param("sigma", 0.5, Constraint::nonnegative),
                           num_param("D", 1.0, Constraint::positive), num_param("C_inf", 1.0, Constraint::positive),
                           num_param("m", 1.5), num_param("p", 4.0), num_param("ms_u0", 1.0, Constraint::positive)};
         },
         [](const Config& c) {
             return t31_check(c.num("a"), c.num("b"), c.num("sigma"), c.num("D"), c.num("C_inf"), c.num("m"), c.num("p"),
                              c.num("ms_u0"));
         }},
        {"t32",
         [] {
             return Schema{num_param("alpha", 1.0), num_param("sigma", 1.0, Constraint::nonnegative),
                           num_param("rho", 1.0, Constraint::positive), num_param("lambda1", kPi2, Constraint::positive)};
         },
         [](const Config& c) { return t32_check(c.num("alpha"), c.num("sigma"), c.num("rho"), c.num("lambda1")); }},
        {"t33",
         [] {
             return Schema{num_param("K", kPi2 - 1.0), num_param("lambda1", kPi2, Constraint::positive),
                           num_param("sigma", 1.0, Constraint::nonnegative)};
         },
         [](const Config& c) { return t33_check(c.num("K"), c.num("lambda1"), c.num("sigma")); }},
        {"t34",
         [] {
             return Schema{num_param("r", 3.0), num_param("m", 1.5), num_param("k1", 1.0), num_param("k2", 1.0),
                           num_param("q0", 1.0), num_param("lambda1", kPi2, Constraint::positive)};
         },
         [](const Config& c) {
             return t34_check(c.num("r"), c.num("m"), c.num("k1"), c.num("k2"), c.num("q0"), c.num("lambda1"));
         }},
        {"t34s",
         [] {
             return Schema{num_param("r", 5.0), num_param("k1", 1.0), num_param("k2", 1.0), num_param("q0", 1.0),
                           num_param("q1", 1.0), num_param("lambda1", kPi2, Constraint::positive)};
         },
         [](const Config& c) {
             return t34_stochastic_check(c.num("r"), c.num("k1"), c.num("k2"), c.num("q0"), c.num("q1"), c.num("lambda1"));
         }},
        {"t36",
         [] {
             return Schema{num_param("variant", 2, Constraint::count, 1), num_param("c1", -1.0), num_param("c2", 0.1),
                           num_param("k1", 1.0), num_param("k2", 2.0), num_param("m", 3.0), num_param("m0", 2.0),
                           num_param("alpha", 2.0)};
         },
         [](const Config& c) {
             if (c.num("variant") > 2.0) throw ConfigError("variant", "must be 1 or 2");
             return t36_check(c.num("variant") == 1.0 ? T36Variant::i : T36Variant::ii, c.num("c1"), c.num("c2"),
                              c.num("k1"), c.num("k2"), c.num("m"), c.num("m0"), c.num("alpha"));
         }},
        {"t41",
         [] {
             return Schema{num_param("beta", 0.1, Constraint::nonnegative), num_param("gamma", 0.5, Constraint::nonnegative),
                           num_param("t", 1.0, Constraint::positive), num_param("alpha", 0.0)};
         },
         [](const Config& c) {
             const double b = c.num("beta"), g = c.num("gamma");
             return t41_check([b](double) { return b; }, [g](double) { return g; }, c.num("t"), c.num("alpha"));
         }},
        {"t42", [] { return Schema{num_param("K", -1.0), num_param("sigma", 1.0, Constraint::nonnegative)}; },
         [](const Config& c) { return t42_check(c.num("K"), c.num("sigma")); }},
    };
    return tags;
}

int cmd_check(const std::string& tag, const std::vector<std::string>& params) {
    const CheckTag* hit = nullptr;
    for (const auto& t : check_tags())
        if (tag == t.tag) hit = &t;
    if (!hit) {
        std::cerr << "unknown theorem tag '" << tag << "'; available:";
        for (const auto& t : check_tags()) std::cerr << " " << t.tag;
        std::cerr << "\n";
        throw UsageError("unknown tag");
    }
    Assignments a;
    for (const auto& p : params) a.push_back(parse_assignment(p, "check"));
    const auto rep = hit->run(resolve_config(hit->schema(), a));
    io::Json out{{"schema", "spdestab.criterion_report"}, {"schema_version", io::kSchemaVersion}};
    const io::Json body = io::to_json(rep);
    for (const auto& [k, v] : body.items()) out[k] = v;
    std::cout << out.dump(2) << "\n";
    if (!rep.applicable()) return 2;
    return rep.satisfied() ? 0 : 1;
}

int cmd_list(const std::string& name) {
    if (name.empty()) {
        print_catalog(std::cout);
        std::cout << "  (simulate keys: spdestab list simulate)\n";
        return 0;
    }
    const Schema schema = name == "simulate" ? simulation_schema() : lookup(name).schema();
    for (const auto& p : schema) {
        if (p.constraint == Constraint::text) {
            std::string choices;
            for (const auto& c : p.choices) choices += (choices.empty() ? "" : "|") + c;
            std::cout << fmt::format("{} = {}    # {}\n", p.key, p.text_fallback, choices);
        } else {
            std::cout << fmt::format("{} = {}\n", p.key, p.fallback);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spdestab: stability criteria for stochastic parabolic equations, checked by simulation"};
    app.require_subcommand(1);
    std::string name, out = "results", tag;
    std::vector<std::string> config_path;
    std::vector<std::string> sets, axes, params;
    unsigned jobs = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config_path, "key=value config file (repeatable, applied in order)")->check(CLI::ExistingFile);
        sub->add_option("--set,-s", sets, "override key=value (repeatable, last wins)")->take_all();
        sub->add_option("--out,-o", out, "output directory");
        sub->add_option("--jobs,-j", jobs, "worker threads (0 = all cores)");
    };
    auto* scn = app.add_subcommand("scenario", "run a named scenario");
    scn->add_option("name", name, "scenario name")->required();
    add_common(scn);
    auto* sim = app.add_subcommand("simulate", "raw ensemble run of a model");
    add_common(sim);
    auto* swp = app.add_subcommand("sweep", "Cartesian sweep of a scenario over up to two keys");
    swp->add_option("name", name, "scenario name")->required();
    swp->add_option("--axis,-a", axes, "key=v1,v2,... or key=lo:hi:n")->required();
    add_common(swp);
    auto* chk = app.add_subcommand("check", "evaluate a criterion, no simulation");
    chk->add_option("tag", tag, "t01 t31 t32 t33 t34 t34s t36 t41 t42")->required();
    chk->add_option("params", params, "key=value parameters");
    auto* lst = app.add_subcommand("list", "list scenarios, or the keys of one");
    lst->add_option("name", name, "scenario name or 'simulate'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    const std::string cmdline = command_line(argc, argv);
    try {
        const unsigned j = resolve_jobs(jobs);
        if (*scn) return cmd_scenario(name, config_path, sets, out, j, cmdline);
        if (*sim) return cmd_simulate(config_path, sets, out, j, cmdline);
        if (*swp) return cmd_sweep(name, config_path, sets, axes, out, j, cmdline);
        if (*chk) return cmd_check(tag, params);
        if (*lst) return cmd_list(name);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kBadConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return kBadConfig;
    } catch (const ConditionViolated& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return kBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
