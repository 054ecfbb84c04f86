// cfm: verification campaigns for the surface configuration-space model.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfm/campaigns.hpp"

using namespace cfm;
using json = nlohmann::ordered_json;

namespace {

json to_json(const Campaign& c, double seconds, bool timing) {
    json j;
    j["command"] = c.command;
    j["engine_version"] = kEngineVersion;
    json args = json::object();
    for (auto& [k, v] : c.args) args[k] = v;
    j["args"] = args;
    j["ok"] = c.ok();
    json checks = json::array();
    for (const Check& ch : c.checks) {
        json x;
        x["name"] = ch.name;
        x["status"] = ch.ok ? "pass" : "fail";
        x["cases"] = ch.cases;
        x["detail"] = ch.detail;
        if (!ch.ok) x["counterexample"] = ch.counterexample;
        checks.push_back(x);
    }
    j["checks"] = checks;
    j["flags"] = c.flags;
    json rows = json::array();
    for (const Row& r : c.rows) {
        json x = json::object();
        for (auto& [k, v] : r) x[k] = v;
        rows.push_back(x);
    }
    j["rows"] = rows;
    if (timing) j["seconds"] = seconds;
    return j;
}

std::string pad(const std::string& s, size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

void print_table(std::ostream& o, const Campaign& c, double seconds, bool timing) {
    o << "cfm " << c.command;
    for (auto& [k, v] : c.args) o << "  " << k << "=" << v;
    o << "\n\n";
    size_t wn = 5;
    for (const Check& ch : c.checks) wn = std::max(wn, std::to_string(ch.cases).size());
    o << pad("STATUS", 8) << pad("CASES", wn + 2) << "CHECK\n";
    for (const Check& ch : c.checks) {
        o << pad(ch.ok ? "pass" : "FAIL", 8) << pad(std::to_string(ch.cases), wn + 2) << ch.name;
        if (!ch.detail.empty() && ch.detail != "graphs checked" && ch.detail != "faces checked" &&
            ch.detail != "random elements")
            o << "  [" << ch.detail << "]";
        o << "\n";
        if (!ch.ok && !ch.counterexample.empty()) o << "        counterexample: " << ch.counterexample << "\n";
    }
    if (!c.flags.empty()) {
        o << "\nflags:\n";
        for (auto& f : c.flags) o << "  - " << f << "\n";
    }
    if (!c.rows.empty()) {
        std::vector<std::string> cols;
        for (auto& [k, v] : c.rows.front()) cols.push_back(k);
        std::vector<size_t> w(cols.size());
        for (size_t i = 0; i < cols.size(); ++i) w[i] = cols[i].size();
        for (const Row& r : c.rows)
            for (size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].second.size());
        o << "\n";
        for (size_t i = 0; i < cols.size(); ++i) o << (i + 1 < cols.size() ? pad(cols[i], w[i] + 2) : cols[i]);
        o << "\n";
        for (const Row& r : c.rows) {
            for (size_t i = 0; i < r.size(); ++i) o << (i + 1 < r.size() ? pad(r[i].second, w[i] + 2) : r[i].second);
            o << "\n";
        }
    }
    long passed = 0;
    for (const Check& ch : c.checks) passed += ch.ok;
    o << "\nresult: " << (c.ok() ? "PASS" : "FAIL") << " (" << passed << "/" << c.checks.size() << " checks)";
    if (timing) o << "  " << seconds << " s";
    o << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification campaigns for the combinatorial model of framed configurations on surfaces"};
    app.require_subcommand(1);
    bool as_json = false, timing = false;
    std::string report;
    app.add_flag("--json", as_json, "print the JSON report instead of the table");
    app.add_flag("--timing", timing, "include wall-clock time (makes output run-dependent)");
    app.add_option("--report", report, "also write the JSON report to this file");

    int genus = 2, points = 1, max_vertices = 3, max_edges_vac = 4, max_r = 3, samples = 120;
    GraphBounds stokes_b, dsq_b{3, 3, 4, 2, 0};
    std::string graph_file;
    bool dump = false;

    auto add_bounds = [](CLI::App* s, GraphBounds& b) {
        s->add_option("--max-internal", b.max_internal, "internal vertices")->capture_default_str();
        s->add_option("--max-external", b.max_external, "external vertices")->capture_default_str();
        s->add_option("--max-edges", b.max_edges, "edges")->capture_default_str();
        s->add_option("--max-deco", b.max_deco, "decorations per graph")->capture_default_str();
    };
    auto genus_opt = [&](CLI::App* s) {
        s->add_option("--genus,-g", genus, "genus")->capture_default_str()->check(CLI::Range(0, 3));
    };

    auto* verify = app.add_subcommand("verify-model", "continuity, d eta, d omega and Delta omega of the model forms");
    genus_opt(verify);
    auto* partition = app.add_subcommand("partition", "partition function against Z_triv on vacuum graphs");
    genus_opt(partition);
    partition->add_option("--max-vertices", max_vertices)->capture_default_str();
    partition->add_option("--max-edges", max_edges_vac)->capture_default_str();
    auto* cohom = app.add_subcommand("cohomology", "Betti numbers of Mo_g(r)");
    genus_opt(cohom);
    cohom->add_option("--points,-r", points)->capture_default_str()->check(CLI::Range(1, 3));
    auto* dsq = app.add_subcommand("d-squared", "d^2 = 0 on the graph complex");
    genus_opt(dsq);
    add_bounds(dsq, dsq_b);
    auto* stokes = app.add_subcommand("stokes", "Stokes defect of A(Gamma)");
    genus_opt(stokes);
    add_bounds(stokes, stokes_b);
    auto* chain = app.add_subcommand("chainmap", "F(d Gamma) = d F(Gamma)");
    genus_opt(chain);
    add_bounds(chain, stokes_b);
    auto* coact = app.add_subcommand("coaction", "compatibility of F with the coactions");
    genus_opt(coact);
    add_bounds(coact, stokes_b);
    auto* vanish = app.add_subcommand("vanishing", "F on the vanishing-lemma patterns");
    genus_opt(vanish);
    add_bounds(vanish, stokes_b);
    auto* integ = app.add_subcommand("integrate", "F of the graph sum in a file");
    integ->add_option("graph-file", graph_file, "graph records, one per line")->required();
    integ->add_flag("--dump", dump, "print the stratified element in the dump format");
    auto* golden = app.add_subcommand("golden-4-7", "the worked example F(Gamma_j) and alpha");
    golden->add_option("--genus,-g", genus, "genus")->capture_default_str()->check(CLI::Range(2, 3));
    auto* g0 = app.add_subcommand("genus0", "the genus 0 variant");
    g0->add_option("--max-r", max_r)->capture_default_str();
    auto* bv = app.add_subcommand("bv-algebra", "dimensions of BV(r) and the co-Leibniz identities");
    bv->add_option("--max-r", max_r)->capture_default_str();
    bv->add_option("--samples", samples)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        auto t0 = std::chrono::steady_clock::now();
        Campaign c;
        StratifiedElement element;
        if (*verify) c = run_verify_model(genus);
        else if (*partition) c = run_partition(genus, max_vertices, max_edges_vac);
        else if (*cohom) c = run_cohomology(genus, points);
        else if (*dsq) c = run_d_squared(genus, dsq_b);
        else if (*stokes) c = run_stokes(genus, stokes_b);
        else if (*chain) c = run_chainmap(genus, stokes_b);
        else if (*coact) c = run_coaction(genus, stokes_b);
        else if (*vanish) c = run_vanishing(genus, stokes_b);
        else if (*integ) c = run_integrate(GraphSum::parse(read_file(graph_file)), element);
        else if (*golden) c = run_golden(genus);
        else if (*g0) c = run_genus0(max_r);
        else if (*bv) c = run_bv_algebra(max_r, samples);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json j = to_json(c, secs, timing);
        if (!report.empty()) std::ofstream(report) << j.dump(2) << "\n";
        if (dump) std::cout << element.dump();
        else if (as_json) std::cout << j.dump(2) << "\n";
        else print_table(std::cout, c, secs, timing);
        return c.ok() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
