#include <doctest.h>

#include "cfm/graphkernel.hpp"
#include "cfm/parallel.hpp"
#include "testutil.hpp"

using namespace cfm;
using testutil::rint;
using testutil::rq;

static GraphSum G(const std::string& s) { return GraphSum::parse(s); }

TEST_CASE("canonical form examples") {
    CHECK(G("genus=1; ext=[1,2]; edges=[(1,2),(1,2)]").is_zero());
    // a path 1 - x - y - 2 with internal vertices listed in both orders
    GraphSum p1 = G("genus=1; ext=[1,2]; int=2; edges=[(1,3),(3,4),(4,2)]");
    GraphSum p2 = G("genus=1; ext=[1,2]; int=2; edges=[(1,4),(4,3),(3,2)]");
    CHECK(p1 == p2);
    GraphSum e1 = G("genus=1; ext=[1,2,3]; edges=[(1,2),(2,3)]");
    GraphSum e2 = G("genus=1; ext=[1,2,3]; edges=[(2,3),(1,2)]");
    CHECK(e1 == e2 * Q(-1));
    // odd automorphism: two internal vertices, each joined to 1 and 2 is fine (even swap of 2 edge pairs)
    CHECK_FALSE(G("genus=0; ext=[1,2]; int=2; edges=[(1,3),(3,2),(1,4),(4,2)]").is_zero());
    // the same shape with one edge per internal vertex decorated by an odd class on each vertex
    CHECK(G("genus=1; ext=[1]; int=2; edges=[(1,2),(1,3)]; deco={2:[a1],3:[a1]}").is_zero() == false);
}

TEST_CASE("parser rejects inadmissible graphs") {
    CHECK_THROWS(G("genus=1; ext=[1]; int=1; edges=[]"));
    CHECK_THROWS(G("genus=1; ext=[1]; int=1; edges=[(1,2),(2,2)]"));
    CHECK_THROWS(G("genus=1; ext=[1]; edges=[(1,5)]"));
    CHECK_THROWS(G("genus=1; ext=[1]; deco={1:[a2]}"));
    CHECK_THROWS(G("genus=1; ext=[1]; bogus=3"));
}

TEST_CASE("record round trip on enumerated graphs") {
    for (int g = 0; g <= 2; ++g) {
        auto keys = enumerate_graphs(g, 2, 2, 3, 1);
        CHECK(keys.size() > 20);
        GraphSum all(g, {1, 2});
        for (auto& k : keys) {
            GraphSum one(g, {1, 2});
            one.add_word(k.k, one.word(k), 1);
            REQUIRE(one.terms().size() == 1);
            CHECK(GraphSum::parse(one.str()) == one);
            all = all + one * rq();
        }
        CHECK(GraphSum::parse(all.str()) == all);
    }
}

TEST_CASE("canonical form is invariant under internal relabeling") {
    for (int it = 0; it < 300; ++it) {
        int g = rint(0, 2), r = rint(1, 3), k = rint(0, 3);
        int n = r + k;
        std::vector<GSym> w;
        int ne = rint(0, 5);
        for (int i = 0; i < ne; ++i) {
            int u = rint(0, n - 1), v = rint(0, n - 1);
            if (u == v && u >= r) continue;
            w.push_back(GSym::edge(u, v));
        }
        int nd = rint(0, 2);
        for (int i = 0; i < nd; ++i) w.push_back(GSym::deco(rint(0, n - 1), rint(1, 2 * g + 1)));
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), testutil::rng());
        std::vector<GSym> w2;
        auto mv = [&](int v) { return v < r ? v : r + perm[v - r]; };
        for (auto& s : w) w2.push_back(s.kind == 0 ? GSym::edge(mv(s.u), mv(s.v)) : GSym::deco(mv(s.u), s.cls));
        // shuffle the word too, tracking the Koszul sign by canonical comparison
        auto a = canonicalize(g, r, k, w), b = canonicalize(g, r, k, w2);
        CHECK(a.first == b.first);
        if (a.first) CHECK(a.second == b.second);
        auto c = canonicalize(g, r, k, std::vector<GSym>(a.second.word.size()) = [&] {
            std::vector<GSym> x;
            for (auto cc : a.second.word) x.push_back(GSym::from_code(cc));
            return x;
        }());
        if (a.first) CHECK((c.first == 1 && c.second == a.second));
    }
}

TEST_CASE("product") {
    GraphSum a = G("genus=1; ext=[1,2,3,4]; edges=[(1,2)]");
    GraphSum b = G("genus=1; ext=[1,2,3,4]; edges=[(3,4)]");
    CHECK(graph_multiply(a, b) == G("genus=1; ext=[1,2,3,4]; edges=[(1,2),(3,4)]"));
    CHECK(graph_multiply(a, b) == graph_multiply(b, a) * Q(-1));
    CHECK(graph_multiply(a, GraphSum::empty_graph(1, {1, 2, 3, 4})) == a);
    CHECK(graph_multiply(a, a).is_zero());
    GraphSum gj = G("genus=1; ext=[1,2,3,4]; int=1; edges=[(1,5)]; deco={5:[a1,b1]}");
    CHECK(graph_multiply(gj, gj).is_zero());  // odd degree
    CHECK(graph_degree(1, graph_multiply(gj, a).terms().begin()->first) == 2);
}

TEST_CASE("differential examples") {
    // d(edge) is the diagonal class
    GraphSum de = graph_differential(G("genus=1; ext=[1,2]; edges=[(1,2)]"));
    CHECK(de == G("genus=1; ext=[1,2]; deco={1:[nu]} | genus=1; ext=[1,2]; deco={2:[nu]} |"
                  "coef=-1; genus=1; ext=[1,2]; deco={1:[a1],2:[b1]} | genus=1; ext=[1,2]; deco={1:[b1],2:[a1]}"));
    CHECK(project_to_mog(de) == mog_differential(MogElement::parse(1, {1, 2}, "w(1,2)")));
    // Gamma_j: external 1 joined to an internal vertex decorated a^j b^j
    for (int g = 1; g <= 3; ++g)
        for (int j = 1; j <= g; ++j) {
            std::string gs = std::to_string(g), js = std::to_string(j);
            GraphSum gj = G("genus=" + gs + "; ext=[1]; int=1; edges=[(1,2)]; deco={2:[a" + js + ",b" + js + "]}");
            GraphSum expect = G("genus=" + gs + "; ext=[1]; deco={1:[nu]} | coef=-1; genus=" + gs +
                                "; ext=[1]; deco={1:[a" + js + ",b" + js + "]}");
            CHECK(graph_differential(gj) == expect);
            CHECK(project_to_mog(gj).is_zero());
            CHECK(project_to_mog(graph_differential(gj)).is_zero());
        }
    // tadpole
    GraphSum t = graph_differential(G("genus=2; ext=[1]; edges=[(1,1)]"));
    CHECK(project_to_mog(t) == MogElement::parse(2, {1}, "-2*nu_1"));
}

TEST_CASE("user supplied partition function enters d") {
    GraphSum gj = G("genus=1; ext=[1]; int=1; edges=[(1,2)]; deco={2:[a1,b1]}");
    PartitionFn z2 = [](int g, int k, const std::vector<GSym>& w) -> Q { return z_triv(g, k, w) * 3; };
    CHECK(graph_differential(gj, z2) == G("coef=3; genus=1; ext=[1]; deco={1:[nu]} | coef=-1; genus=1; ext=[1]; deco={1:[a1,b1]}"));
}

TEST_CASE("d squared vanishes with Z_triv") {
    for (int g = 0; g <= 2; ++g)
        for (int r = 1; r <= 2; ++r) {
            std::vector<int> ext;
            for (int i = 1; i <= r; ++i) ext.push_back(i);
            auto keys = enumerate_graphs(g, r, 2, 3, 1);
            std::vector<int> bad(keys.size(), 0);
            parallel_for(keys.size(), [&](size_t i) {
                GraphSum x(g, ext);
                x.add_word(keys[i].k, x.word(keys[i]), 1);
                bad[i] = !graph_differential(graph_differential(x)).is_zero();
            });
            CHECK(std::count(bad.begin(), bad.end(), 1) == 0);
        }
}

TEST_CASE("projection is a chain map") {
    for (int g = 0; g <= 2; ++g) {
        auto keys = enumerate_graphs(g, 2, 1, 3, 2);
        for (auto& k : keys) {
            GraphSum x(g, {1, 2});
            x.add_word(k.k, x.word(k), 1);
            CHECK(project_to_mog(graph_differential(x)) == mog_differential(project_to_mog(x)));
        }
    }
}

TEST_CASE("coaction examples") {
    GraphTensor t = graph_coaction(G("genus=1; ext=[1,2]; edges=[(1,2)]"), {1, 2}, 3);
    REQUIRE(t.terms.size() == 2);
    GraphSum l(1, t.left_ext);
    for (auto& [k, c] : t.terms) {
        CHECK(c == 1);
        if (k.second.n) {
            CHECK(mono_str(k.second) == "w(1,2)");
            CHECK(k.first.word.empty());
        } else {
            GraphSum x(1, t.left_ext);
            x.add_word(k.first.k, x.word(k.first), 1);
            CHECK(x == G("genus=1; ext=[3]; edges=[(3,3)]"));
        }
    }
    GraphTensor e = graph_coaction(GraphSum::empty_graph(1, {1, 2}), {1, 2}, 3);
    REQUIRE(e.terms.size() == 1);
    CHECK(e.terms.begin()->first.first.word.empty());
    CHECK(e.terms.begin()->first.second.n == 0);
}

static std::map<std::pair<MogKey, Mono>, Q> project_left(const GraphTensor& t, int g) {
    std::map<std::pair<MogKey, Mono>, Q> out;
    for (auto& [k, c] : t.terms) {
        GraphSum x(g, t.left_ext);
        x.add_word(k.first.k, x.word(k.first), c);
        MogElement p = project_to_mog(x);
        for (auto& [mk, mc] : p.terms()) out[{mk, k.second}] += mc;
    }
    for (auto i = out.begin(); i != out.end();) i = i->second == 0 ? out.erase(i) : std::next(i);
    return out;
}

TEST_CASE("coaction: counit, coassociativity, compatibility with projection and d") {
    for (int g = 0; g <= 2; ++g) {
        auto keys = enumerate_graphs(g, 3, 1, 3, 1);
        int n = 0;
        for (auto& k : keys) {
            if (rint(0, 3)) continue;
            ++n;
            GraphSum x(g, {1, 2, 3});
            x.add_word(k.k, x.word(k), 1);
            // projection compatibility
            GraphTensor t = graph_coaction(x, {1, 2}, 7);
            MogTensor mt = mog_coaction(project_to_mog(x), {1, 2}, 7);
            CHECK(project_left(t, g) == mt.terms);
            // chain map: Delta d = (d (x) 1) Delta
            GraphTensor td = graph_coaction(graph_differential(x), {1, 2}, 7);
            GraphTensor dt{t.left_ext, t.right_pts, {}};
            for (auto& [kk, c] : t.terms) {
                GraphSum y(g, t.left_ext);
                y.add_word(kk.first.k, y.word(kk.first), c);
                GraphSum dy = graph_differential(y);
                for (auto& [dk, dc] : dy.terms()) dt.terms[{dk, kk.second}] += dc;
            }
            for (auto i = dt.terms.begin(); i != dt.terms.end();) i = i->second == 0 ? dt.terms.erase(i) : std::next(i);
            CHECK(td == dt);
            // counit
            GraphTensor c1 = graph_coaction(x, {2}, 2);
            GraphSum back(g, {1, 2, 3});
            for (auto& [kk, c] : c1.terms)
                if (kk.second.n == 0) back.add_word(kk.first.k, back.word(kk.first), c);
            CHECK(back == x);
            // coassociativity: {1,2,3} then {1,2} on the right, vs {1,2} then {3,11}
            std::map<std::tuple<GraphKey, Mono, Mono>, Q> A, B;
            GraphTensor a = graph_coaction(x, {1, 2, 3}, 10);
            for (auto& [kk, c] : a.terms) {
                AlgElement rr(Presentation::bv({1, 2, 3}));
                rr.terms()[kk.second] = 1;
                AlgTensor rt = cocompose(rr, {1, 2}, 11);
                for (auto& [rk, rc] : rt.terms) A[{kk.first, rk.first, rk.second}] += c * rc;
            }
            GraphTensor b1 = graph_coaction(x, {1, 2}, 11);
            for (auto& [kk, c] : b1.terms) {
                GraphSum y(g, b1.left_ext);
                y.add_word(kk.first.k, y.word(kk.first), 1);
                GraphTensor b2 = graph_coaction(y, {3, 11}, 10);
                for (auto& [k2, c2] : b2.terms) B[{k2.first, k2.second, kk.second}] += c * c2;
            }
            for (auto i = A.begin(); i != A.end();) i = i->second == 0 ? A.erase(i) : std::next(i);
            for (auto i = B.begin(); i != B.end();) i = i->second == 0 ? B.erase(i) : std::next(i);
            CHECK(A == B);
        }
        CHECK(n > 5);
    }
}

TEST_CASE("vacuum graph enumeration") {
    auto v = enumerate_vacuum_graphs(1, 1, 0);
    // one vertex with degree-2 decorations: nu, a1 b1
    CHECK(v.size() == 2);
    for (auto& k : enumerate_vacuum_graphs(2, 3, 4)) {
        int E = 0, D = 0;
        HBasis H{2};
        for (auto c : k.word) {
            GSym s = GSym::from_code(c);
            if (s.kind == 0) ++E;
            else D += H.degree(s.cls);
        }
        CHECK(E + D == 2 * k.k);
    }
}
