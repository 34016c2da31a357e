#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "vmcsim/rng.hpp"
#include "vmcsim/select.hpp"

using namespace vmcsim;

namespace {

struct CandidateStore {
    std::vector<std::vector<double>> histories;
    std::vector<VmCandidate> candidates;

    void add(VmId id, double ram, std::vector<double> history) {
        histories.push_back(std::move(history));
        candidates.push_back(VmCandidate{id, ram, {}});
    }
    std::span<const VmCandidate> view() {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            candidates[i].history = histories[i];
        return candidates;
    }
};

std::vector<double> random_history(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = next_unit(rng);
    return v;
}

} // namespace

TEST_CASE("mmt picks the smallest RAM, then the lowest id") {
    CandidateStore s;
    s.add(3, 1024.0, {});
    s.add(7, 512.0, {});
    CHECK(select_mmt(s.view()) == 7);

    CandidateStore uniform;
    uniform.add(9, 1024.0, {});
    uniform.add(4, 1024.0, {});
    uniform.add(6, 1024.0, {});
    CHECK(select_mmt(uniform.view()) == 4);

    CandidateStore single;
    single.add(12, 1024.0, {});
    CHECK(select_mmt(single.view()) == 12);
}

TEST_CASE("mmt ignores history contents") {
    std::mt19937_64 rng(31);
    CandidateStore a, b;
    a.add(1, 700.0, random_history(rng, 12));
    a.add(2, 600.0, random_history(rng, 12));
    b.add(1, 700.0, random_history(rng, 12));
    b.add(2, 600.0, random_history(rng, 12));
    CHECK(select_mmt(a.view()) == select_mmt(b.view()));
}

TEST_CASE("rc is deterministic given the engine state") {
    CandidateStore s;
    s.add(1, 1024.0, {});
    s.add(2, 1024.0, {});
    s.add(3, 1024.0, {});
    std::mt19937_64 r1(42), r2(42);
    CHECK(select_rc(s.view(), r1) == select_rc(s.view(), r2));

    CandidateStore single;
    single.add(5, 1024.0, {});
    std::mt19937_64 r3(1);
    CHECK(select_rc(single.view(), r3) == 5);
}

TEST_CASE("rc draws roughly uniformly") {
    CandidateStore s;
    s.add(0, 1024.0, {});
    s.add(1, 1024.0, {});
    s.add(2, 1024.0, {});
    std::mt19937_64 rng(7);
    int counts[3] = {0, 0, 0};
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) counts[select_rc(s.view(), rng)]++;
    for (int c : counts)
        CHECK(std::fabs(static_cast<double>(c) / draws - 1.0 / 3.0) < 0.03);
}

TEST_CASE("mc prefers the best-explained history") {
    std::mt19937_64 rng(53);
    auto shared = random_history(rng, 12);
    CandidateStore s;
    s.add(2, 1024.0, shared);
    s.add(5, 1024.0, shared);                      // identical to vm 2
    s.add(1, 1024.0, std::vector<double>(12, 0.4)); // constant
    // Both copies are fully explained; the lower id wins the tie.
    CHECK(select_mc(s.view(), 12) == 2);
}

TEST_CASE("mc degenerates to the lowest id on constant histories") {
    CandidateStore s;
    s.add(4, 1024.0, std::vector<double>(12, 0.2));
    s.add(2, 1024.0, std::vector<double>(12, 0.7));
    s.add(9, 1024.0, std::vector<double>(12, 0.5));
    CHECK(select_mc(s.view(), 12) == 2);
}

TEST_CASE("mc falls back to mmt without enough history") {
    CandidateStore s;
    s.add(3, 2048.0, std::vector<double>(5, 0.2));  // short history
    s.add(8, 512.0, std::vector<double>(12, 0.7));
    CHECK(select_mc(s.view(), 12) == 8);  // mmt: smallest RAM

    CandidateStore single;
    single.add(6, 1024.0, std::vector<double>(12, 0.1));
    CHECK(select_mc(single.view(), 12) == 6);
}

TEST_CASE("mc matches the brute-force argmax on random instances") {
    std::mt19937_64 rng(59);
    for (int round = 0; round < 200; ++round) {
        std::size_t k = 2 + next_below(rng, 4);  // 2..5 candidates
        CandidateStore s;
        std::vector<oracle::McCandidate> ref;
        for (std::size_t j = 0; j < k; ++j) {
            auto h = random_history(rng, 12);
            int id = static_cast<int>(next_below(rng, 50));
            while (std::any_of(ref.begin(), ref.end(),
                               [&](const auto& c) { return c.id == id; }))
                id = static_cast<int>(next_below(rng, 50));
            s.add(id, 1024.0, h);
            ref.push_back(oracle::McCandidate{id, h});
        }
        CHECK(select_mc(s.view(), 12) == oracle::mc_argmax_ref(ref));
    }
}

TEST_CASE("mc choice is invariant under a common history shift") {
    std::mt19937_64 rng(61);
    for (int round = 0; round < 50; ++round) {
        std::size_t k = 2 + next_below(rng, 3);
        double shift = next_unit(rng) * 0.2;
        CandidateStore plain, shifted;
        for (std::size_t j = 0; j < k; ++j) {
            auto h = random_history(rng, 12);
            for (auto& x : h) x *= 0.7;  // leave room for the shift
            auto hs = h;
            for (auto& x : hs) x += shift;
            int id = static_cast<int>(j);
            plain.add(id, 1024.0, h);
            shifted.add(id, 1024.0, hs);
        }
        CHECK(select_mc(plain.view(), 12) == select_mc(shifted.view(), 12));
    }
}

TEST_CASE("selectors always return a candidate and shrink to termination") {
    std::mt19937_64 rng(67);
    for (auto kind :
         {SelectorConfig::Kind::Mmt, SelectorConfig::Kind::Rc, SelectorConfig::Kind::Mc}) {
        SelectorConfig cfg = SelectorConfig::make(kind);
        CandidateStore s;
        std::size_t k = 3 + next_below(rng, 5);
        for (std::size_t j = 0; j < k; ++j)
            s.add(static_cast<int>(j * 3), 256.0 * static_cast<double>(1 + next_below(rng, 8)),
                  random_history(rng, 12));

        auto pool = s.view();
        std::vector<VmCandidate> remaining(pool.begin(), pool.end());
        std::size_t steps = 0;
        while (!remaining.empty()) {
            VmId pick = select_vm(cfg, remaining, rng);
            auto it = std::find_if(remaining.begin(), remaining.end(),
                                   [&](const VmCandidate& c) { return c.id == pick; });
            REQUIRE(it != remaining.end());  // membership
            remaining.erase(it);
            ++steps;
            REQUIRE(steps <= k);
        }
        CHECK(steps == k);
    }
}

TEST_CASE("selector parsing") {
    CHECK(parse_selector("mmt").kind == SelectorConfig::Kind::Mmt);
    CHECK(parse_selector("rc").kind == SelectorConfig::Kind::Rc);
    CHECK(parse_selector("mc").kind == SelectorConfig::Kind::Mc);
    CHECK_THROWS_WITH(parse_selector("best"), Catch::Matchers::ContainsSubstring("best"));
}
