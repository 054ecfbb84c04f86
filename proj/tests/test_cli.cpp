#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "cfm/feynman.hpp"

using namespace cfm;

#ifndef CFM_CLI_PATH
#error "CFM_CLI_PATH must point at the cfm binary"
#endif

namespace {

std::string run(const std::string& cmd, int& status) {
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    status = pclose(p);
    return out;
}

}  // namespace

TEST_CASE("integrate --dump round-trips through the parser") {
    const std::string record = "genus=2; ext=[1,2]; int=1; edges=[(1,3),(2,3)]; deco={3:[a2]}";
    const std::string path = "cli_roundtrip_graph.txt";
    std::ofstream(path) << record << "\n";
    int status = 0;
    std::string dump = run(std::string(CFM_CLI_PATH) + " integrate " + path + " --dump", status);
    CHECK(status == 0);
    StratifiedElement parsed = StratifiedElement::parse_dump(dump);
    CHECK(parsed == map_F(GraphSum::parse(record)));
    CHECK(parsed.dump() == dump);
}

TEST_CASE("JSON reports are deterministic and the exit code reflects the result") {
    int s1 = 0, s2 = 0;
    std::string a = run(std::string(CFM_CLI_PATH) + " --json golden-4-7 -g 2", s1);
    std::string b = run(std::string(CFM_CLI_PATH) + " --json golden-4-7 -g 2", s2);
    CHECK(s1 == 0);
    CHECK(a == b);
    CHECK(a.rfind("{\n  \"command\": \"golden-4-7\",\n  \"engine_version\"", 0) == 0);
    int bad = 0;
    run(std::string(CFM_CLI_PATH) + " integrate /nonexistent/graph.txt 2>/dev/null", bad);
    CHECK(bad != 0);
}
