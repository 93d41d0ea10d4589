// hca: grid, validate-table, simulate, render, railway, golden
// exit 0 ok, 1 data or invariant failure, 2 usage

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hca/engine.hpp"
#include "hca/gadgets.hpp"
#include "hca/heptagrid.hpp"
#include "hca/railway.hpp"
#include "hca/render.hpp"
#include "hca/table.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hca;

namespace {

std::string fnv1a64(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "unreadable";
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

struct Manifest {
    std::string command;
    json flags = json::object();
    json inputs = json::array();
    std::vector<std::string> findings;
    std::vector<std::string> documented;

    void input(const fs::path& p) { inputs.push_back({{"path", p.generic_string()}, {"fnv1a64", fnv1a64(p)}}); }
    json to_json(int status) const {
        return {{"command", command}, {"flags", flags}, {"inputs", inputs}, {"exit_status", status},
                {"findings", findings}, {"documented", documented}};
    }
};

GadgetLayout resolve_gadget(const std::string& arg, Manifest& m) {
    fs::path p(arg);
    if (!fs::is_regular_file(p)) p = data_dir() / "gadgets" / (arg + ".gad");
    m.input(p);
    return load_gadget(p);
}

// the table with errata claims applied: an error finding whose numbers are listed becomes documented
void table_findings(const TableReport& r, const Errata& e, Manifest& m) {
    for (const auto& f : r.findings) {
        std::string line = f.code + ": " + f.message;
        bool listed = false;
        if (f.severity == Finding::Severity::error)
            if (const ClaimErratum* c = e.claim(f.code))
                listed = f.code == "distinct-sigmas" && c->data == std::to_string(r.distinct_sigmas);
        if (f.severity == Finding::Severity::documented || listed)
            m.documented.push_back(line);
        else
            m.findings.push_back(line);
    }
}

void print_report(const TableReport& r, std::ostream& os) {
    os << "entries\t" << r.entry_count << "\n"
       << "distinct-sigmas\t" << r.distinct_sigmas << "\n"
       << "max-sigma\t" << r.max_sigma << "\n"
       << "determinism-conflicts\t" << r.determinism_conflicts.size() << "\n"
       << "shared-keys\t" << r.shared_keys.size() << "\n";
}

TileAddress address_arg(const std::string& s) {
    auto t = parse_address(s);
    if (!t) throw std::invalid_argument("bad tile address `" + s + "`");
    return *t;
}

CellState color_arg(const std::string& s) {
    auto c = parse_color(s);
    if (!c) throw CLI::ValidationError("--color", "expected blue or mauve");
    return *c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heptagrid cellular automaton: grid, table, gadgets, railway"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "write the run manifest here instead of stderr");

    // grid
    auto* grid = app.add_subcommand("grid", "ring sizes of a window, neighbours of a tile");
    int grid_radius = 3;
    std::string grid_tile;
    grid->add_option("--radius", grid_radius, "window radius")->check(CLI::Range(0, max_window_radius));
    grid->add_option("--neighbors", grid_tile, "print the neighbours of this tile (s,n or 0)");

    // validate-table
    auto* vt = app.add_subcommand("validate-table", "statistics and consistency checks of the transition table");
    std::string vt_file, errata_file;
    vt->add_option("file", vt_file, "table file (default: data dir table.txt)");
    vt->add_option("--errata", errata_file, "errata file (default: data dir errata.txt)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a gadget and print the trace of one cell");
    std::string sim_gadget, sim_inject, sim_color = "blue", sim_mode, sim_format = "tsv", sim_observe;
    int sim_steps = 8;
    unsigned sim_workers = 1;
    sim->add_option("--gadget", sim_gadget, "gadget kind or .gad file")->required();
    sim->add_option("--inject", sim_inject, "injection point (none: the idle layout)");
    sim->add_option("--color", sim_color, "locomotive colour: blue or mauve");
    sim->add_option("--steps", sim_steps, "number of steps")->check(CLI::NonNegativeNumber);
    sim->add_option("--mode", sim_mode, "strict | quiescent | vanish (default: the gadget's)");
    sim->add_option("--observe", sim_observe, "cell to trace (default: the gadget's)");
    sim->add_option("--format", sim_format, "tsv | json")->check(CLI::IsMember({"tsv", "json"}));
    sim->add_option("--workers", sim_workers, "threads per step")->check(CLI::PositiveNumber);

    // render
    auto* ren = app.add_subcommand("render", "SVG snapshots in the Poincare disc");
    std::string ren_gadget, ren_inject, ren_color = "blue", ren_out;
    int ren_steps = 0, ren_every = 1, ren_size = 1024, ren_radius = -1;
    bool ren_rays = false;
    ren->add_option("--gadget", ren_gadget, "gadget kind or .gad file (none: empty window)");
    ren->add_option("--inject", ren_inject, "injection point");
    ren->add_option("--color", ren_color, "locomotive colour");
    ren->add_option("--steps", ren_steps, "simulate this many steps")->check(CLI::NonNegativeNumber);
    ren->add_option("--every", ren_every, "write one frame every k steps")->check(CLI::PositiveNumber);
    ren->add_option("--out", ren_out, "output file, <prefix>.svg")->required();
    ren->add_option("--size", ren_size, "pixels")->check(CLI::PositiveNumber);
    ren->add_option("--radius", ren_radius, "rings to draw (default: the whole window)");
    ren->add_flag("--rays", ren_rays, "draw the sector rays");

    // railway
    auto* rw = app.add_subcommand("railway", "run a two-register program through the schematic circuit");
    std::string rw_program, rw_log, rw_format = "tsv";
    long long rw_r0 = 0, rw_r1 = 0;
    long rw_fuel = 1'000'000;
    rw->add_option("--program", rw_program, "program file")->required();
    rw->add_option("--r0", rw_r0, "initial r0")->check(CLI::NonNegativeNumber);
    rw->add_option("--r1", rw_r1, "initial r1")->check(CLI::NonNegativeNumber);
    rw->add_option("--fuel", rw_fuel, "event budget")->check(CLI::PositiveNumber);
    rw->add_option("--log", rw_log, "write the event log (TSV) here");
    rw->add_option("--format", rw_format, "tsv | json")->check(CLI::IsMember({"tsv", "json"}));

    // golden
    auto* gold = app.add_subcommand("golden", "table validation and every expected trace");

    Manifest m;
    int status = 0;
    auto emit = [&](int st) {
        json j = m.to_json(st);
        if (manifest_path.empty()) {
            std::cerr << j.dump(2) << "\n";
        } else {
            std::ofstream f(manifest_path);
            f << j.dump(2) << "\n";
        }
        return st;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        m.command = "usage";
        m.findings.push_back(e.what());
        return emit(2);
    }

    try {
        if (grid->parsed()) {
            m.command = "grid";
            m.flags = {{"radius", grid_radius}};
            DiscWindow w(grid_radius);
            std::cout << "ring\ttiles\t7*f(2r-1)\n";
            for (int r = 0; r <= grid_radius; ++r) {
                std::cout << r << "\t" << w.ring(r).size() << "\t" << (r == 0 ? 1 : 7 * fibonacci(2 * r - 1)) << "\n";
                if (r > 0 && static_cast<long long>(w.ring(r).size()) != 7 * fibonacci(2 * r - 1))
                    m.findings.push_back("ring " + std::to_string(r) + " size disagrees with 7*f(2r-1)");
            }
            std::cout << "total\t" << w.size() << "\n";
            if (!grid_tile.empty()) {
                TileAddress t = address_arg(grid_tile);
                m.flags["neighbors"] = to_string(t);
                std::cout << "neighbors of " << to_string(t) << ":";
                for (auto& n : w.neighbors(t)) std::cout << " " << (n ? to_string(*n) : std::string("-"));
                std::cout << "\n";
            }
        } else if (vt->parsed() || gold->parsed()) {
            m.command = vt->parsed() ? "validate-table" : "golden";
            fs::path tf = vt_file.empty() ? data_dir() / "table.txt" : fs::path(vt_file);
            fs::path ef = errata_file.empty() ? data_dir() / "errata.txt" : fs::path(errata_file);
            m.input(tf);
            m.input(ef);
            TransitionTable t = load_table(tf);
            Errata e = load_errata(ef);
            TableReport r = validate_table(t);
            print_report(r, std::cout);
            table_findings(r, e, m);
            if (gold->parsed()) {
                for (const auto& k : gadget_kinds()) m.input(data_dir() / "gadgets" / (k + ".gad"));
                GoldenReport g = run_golden(t, e);
                for (const auto& l : g.lines) {
                    int listed = static_cast<int>(std::count(l.listed.begin(), l.listed.end(), true));
                    std::string verdict = !l.error.empty() ? "FAIL"
                                          : l.diffs.empty() ? "PASS"
                                          : listed == static_cast<int>(l.diffs.size()) ? "ERRATA"
                                                                                       : "FAIL";
                    std::cout << verdict << "\t" << l.gadget << "\t" << l.trace << "\t" << l.diffs.size() << " diffs, "
                              << listed << " listed\n";
                }
                for (auto& f : g.failures) m.findings.push_back(f);
                for (auto& d : g.documented) m.documented.push_back(d);
            }
            for (auto& d : m.documented) std::cout << "documented\t" << d << "\n";
            for (auto& f : m.findings) std::cout << "FINDING\t" << f << "\n";
        } else if (sim->parsed()) {
            m.command = "simulate";
            GadgetLayout g = resolve_gadget(sim_gadget, m);
            DefaultRule rule = g.mode;
            if (!sim_mode.empty()) {
                auto r = parse_rule(sim_mode);
                if (!r) throw CLI::ValidationError("--mode", "expected strict, quiescent or vanish");
                rule = *r;
            }
            TileAddress obs = sim_observe.empty() ? g.observe.value_or(TileAddress{}) : address_arg(sim_observe);
            m.flags = {{"gadget", g.name}, {"inject", sim_inject}, {"color", sim_color}, {"steps", sim_steps},
                       {"mode", to_string(rule)}, {"observe", to_string(obs)}, {"workers", sim_workers}};
            fs::path tf = data_dir() / "table.txt";
            m.input(tf);
            TransitionTable t = load_table(tf);
            Configuration c = sim_inject.empty() ? idle_configuration(g) : inject(g, sim_inject, color_arg(sim_color));
            int slot = c.window().require(obs);
            json rows = json::array();
            if (sim_format == "tsv") std::cout << "time\tstate\tsigma\tentry\tsupport\n";
            try {
                std::vector<CellUpdate> ups;
                for (int k = 0; k <= sim_steps; ++k) {
                    CellState cur = c.at(slot);
                    std::size_t support = c.support().size();
                    if (k == sim_steps) {
                        if (sim_format == "tsv") std::cout << k << "\t" << state_letter(cur) << "\t-\t-\t" << support << "\n";
                        rows.push_back({{"time", k}, {"state", std::string(1, state_letter(cur))}, {"support", support}});
                        break;
                    }
                    Configuration n = step(c, t, rule, sim_workers, &ups);
                    const CellUpdate& u = ups[slot];
                    std::string entry = u.entry ? std::to_string(u.entry->id) : "w*";
                    if (sim_format == "tsv")
                        std::cout << k << "\t" << state_letter(cur) << "\t" << u.sigma << "\t" << entry << "\t" << support << "\n";
                    rows.push_back({{"time", k}, {"state", std::string(1, state_letter(cur))}, {"sigma", u.sigma},
                                    {"entry", entry}, {"support", support}});
                    c = std::move(n);
                }
            } catch (const StepError& e) {
                m.findings.push_back(e.what());
                std::cout << "error\t" << e.what() << "\n";
            }
            if (sim_format == "json") std::cout << json{{"gadget", g.name}, {"observe", to_string(obs)}, {"rows", rows}}.dump(2) << "\n";
        } else if (ren->parsed()) {
            m.command = "render";
            std::optional<GadgetLayout> g;
            if (!ren_gadget.empty()) g = resolve_gadget(ren_gadget, m);
            Configuration c = g ? (ren_inject.empty() ? idle_configuration(*g) : inject(*g, ren_inject, color_arg(ren_color)))
                                : Configuration(shared_window(ren_radius < 0 ? 3 : ren_radius));
            RenderSpec spec;
            spec.radius = ren_radius < 0 ? c.window().radius() : ren_radius;
            spec.size = ren_size;
            spec.sector_rays = ren_rays;
            m.flags = {{"gadget", g ? g->name : ""}, {"inject", ren_inject}, {"steps", ren_steps}, {"every", ren_every},
                       {"size", ren_size}, {"radius", spec.radius}, {"out", ren_out}};
            auto write = [&](const fs::path& p) {
                std::ofstream f(p);
                if (!f) throw std::runtime_error("cannot write " + p.string());
                f << render_window(c, spec);
                std::cout << p.generic_string() << "\n";
            };
            if (ren_steps == 0) {
                write(ren_out);
            } else {
                if (!g) throw CLI::ValidationError("--steps", "needs --gadget");
                fs::path tf = data_dir() / "table.txt";
                m.input(tf);
                TransitionTable t = load_table(tf);
                fs::path out(ren_out);
                std::string stem = (out.parent_path() / out.stem()).string();
                for (int k = 0; k <= ren_steps; ++k) {
                    if (k % ren_every == 0) {
                        char num[16];
                        std::snprintf(num, sizeof num, "_%04d.svg", k);
                        write(stem + num);
                    }
                    if (k < ren_steps) c = step(c, t, g->mode);
                }
            }
        } else if (rw->parsed()) {
            m.command = "railway";
            m.input(rw_program);
            m.flags = {{"r0", rw_r0}, {"r1", rw_r1}, {"fuel", rw_fuel}, {"log", rw_log}};
            std::ifstream in(rw_program);
            if (!in) throw std::runtime_error("cannot open program " + rw_program);
            railway::MachineProgram p = railway::parse_program(in);
            railway::MachineOptions o;
            o.fuel = rw_fuel;
            o.keep_log = !rw_log.empty();
            railway::MachineResult r = railway::run_machine(p, rw_r0, rw_r1, o);
            auto direct = railway::interpret(p, rw_r0, rw_r1, r.instructions + (r.halted ? 1 : 0));
            bool agree = direct.r0 == r.r0 && direct.r1 == r.r1 && direct.halted == r.halted;
            if (!agree) m.findings.push_back("circuit and interpreter disagree");
            for (auto& q : r.problems) m.findings.push_back(q);
            if (rw_format == "tsv") {
                std::cout << "verdict\t" << r.verdict << "\nr0\t" << r.r0 << "\nr1\t" << r.r1 << "\ninstructions\t"
                          << r.instructions << "\nevents\t" << r.events << "\ninterpreter\t"
                          << (agree ? "agrees" : "disagrees") << "\n";
            } else {
                std::cout << json{{"verdict", r.verdict}, {"halted", r.halted}, {"r0", r.r0}, {"r1", r.r1},
                                  {"instructions", r.instructions}, {"events", r.events}, {"interpreter_agrees", agree}}
                                 .dump(2)
                          << "\n";
            }
            if (!rw_log.empty()) {
                std::ofstream f(rw_log);
                if (!f) throw std::runtime_error("cannot write " + rw_log);
                railway::write_tsv(f, r.log);
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        m.findings.push_back(e.what());
        return emit(2);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        m.findings.push_back(e.what());
        return emit(2);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        m.findings.push_back(e.what());
        return emit(1);
    }
    status = m.findings.empty() ? 0 : 1;
    return emit(status);
}
