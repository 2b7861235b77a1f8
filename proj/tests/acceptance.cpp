// acceptance.cpp
// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any
// gated criterion fails; lines marked INFO never affect it.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "lrc/analytic.hpp"
#include "lrc/digest.hpp"
#include "lrc/pipeline.hpp"
#include "lrc/planner.hpp"
#include "lrc/sieve.hpp"
#include "lrc/witness.hpp"
#include "oracle.hpp"
#include "scratch_dir.hpp"
#include "table1.hpp"

using namespace lrc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs one criterion; body returns a detail string and sets ok.
void criterion(int n, const char* title, const std::function<std::string(bool&)>& body) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    detail = body(ok);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s (%s; %.1f s)\n", ok ? "PASS" : "FAIL", n, title, detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

void info(bool ok, const std::string& what) {
  std::printf("INFO %s %s\n", ok ? "pass" : "fail", what.c_str());
  std::fflush(stdout);
}

std::set<oracle::Tuple> as_set(const TupleSet& s) {
  std::set<oracle::Tuple> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.emplace(s[i].begin(), s[i].end());
  return out;
}

std::vector<Residue> primes_of(const VerdictLedger& l) {
  std::vector<Residue> out;
  for (const auto& c : l.certificates) out.push_back(c.prime);
  return out;
}

std::string join(const std::vector<Residue>& v) {
  std::string s;
  for (Residue x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

bool all_routes(const VerdictLedger& l, Route r) {
  for (const auto& c : l.certificates) {
    if (c.route != r) return false;
  }
  return true;
}

TupleSet full_improper(int k, Residue p, Residue l) {
  std::vector<Residue> flat;
  oracle::for_each_tuple(k, p, l, [&](const oracle::Tuple& v) {
    if (oracle::improper(v, k, p, l)) flat.insert(flat.end(), v.begin(), v.end());
  });
  return TupleSet::from_flat(AnsatzParams(k, p, l), "I", std::move(flat));
}

}  // namespace

int main() {
  criterion(1, "bound arithmetic and published prime products", [](bool& ok) {
    const auto t0 = Clock::now();
    const double ln_caps[] = {338, 435, 546};
    const double ln_floors[] = {342, 435, 547};
    const std::vector<Residue>* sets[] = {&table1::kPrimes10, &table1::kPrimes11, &table1::kPrimes12};
    std::ostringstream d;
    for (int i = 0; i < 3; ++i) {
      const int k = 10 + i;
      const BoundValue b = compute_bound(k);
      mpz_class prod = 1;
      for (Residue p : *sets[i]) {
        ok = ok && oracle::is_prime(p);
        prod *= p;
      }
      const double ln_prod = ln_of(prod);
      ok = ok && b.ln < ln_caps[i] && b.met_by(prod) && ln_prod > ln_floors[i];
      d << "k=" << k << " lnB=" << format_ln(b.ln) << " lnP=" << format_ln(ln_prod) << "; ";
    }
    ok = ok && seconds_since(t0) < 1.0;
    return d.str();
  });

  criterion(2, "end-to-end LRC(3) and LRC(4)", [](bool& ok) {
    const auto t0 = Clock::now();
    ScratchDir dir("accept-small");
    PlanOptions o3;
    o3.workdir = dir.path();
    o3.diagram = parse_diagram("x2,x2");
    const VerdictLedger l3 = plan_primes(3, o3);
    PlanOptions o4 = o3;
    o4.diagram = parse_diagram("x2,x2,/4,x5");
    const VerdictLedger l4 = plan_primes(4, o4);
    ok = l3.verdict == Verdict::Verified && l4.verdict == Verdict::Verified &&
         l3.dependency.kind == Dependency::Kind::Trivial && l4.dependency.kind == Dependency::Kind::VerifiedHere &&
         all_routes(l3, Route::DiagramEmpty) && all_routes(l4, Route::DiagramEmpty) &&
         primes_of(l3) == std::vector<Residue>{7, 11, 13, 17} &&
         primes_of(l4) == std::vector<Residue>{13, 17, 19, 23, 29, 31, 37, 41} &&
         verify_ledger(l4, dir.path()).passed && audit(l4, dir.path()).passed;
    ok = ok && seconds_since(t0) < 60.0;
    return "k=3 primes " + join(primes_of(l3)) + "; k=4 primes " + join(primes_of(l4));
  });

  criterion(3, "LRC(8) campaign assuming LRC(7)", [](bool& ok) {
    const auto t0 = Clock::now();
    ScratchDir dir("accept-k8");
    PlanOptions o;
    o.workdir = dir.path();
    o.diagram = parse_diagram("x2,/2,x3,x3");
    o.assume_literature = true;
    o.threads = std::max(1u, std::thread::hardware_concurrency());
    const VerdictLedger l = plan_primes(8, o);
    const CheckReport v = verify_ledger(l, dir.path());
    const double secs = seconds_since(t0);
    ok = l.verdict == Verdict::Verified && l.dependency.kind == Dependency::Kind::Literature && v.passed &&
         secs <= 1800.0;
    std::ostringstream d;
    d << l.certificates.size() << " primes " << l.certificates.front().prime << ".." << l.certificates.back().prime
      << ", " << l.skipped.size() << " skipped, lnP=" << format_ln(ln_of(l.product))
      << " lnB=" << format_ln(l.bound.ln) << ", threads=" << o.threads;
    return d.str();
  });

  criterion(4, "sieve equals the brute-force oracle", [](bool& ok) {
    std::ostringstream d;
    for (auto [k, p] : {std::pair{3, 5u}, std::pair{3, 7u}, std::pair{4, 7u}, std::pair{4, 11u}}) {
      const auto s = as_set(sieve_initial(k, p));
      ok = ok && s == oracle::canonical_improper(k, p);
      d << "(" << k << "," << p << ")=" << s.size() << " ";
    }
    return d.str();
  });

  criterion(5, "lift equals the brute-force fiber", [](bool& ok) {
    const TupleSet i1 = full_improper(3, 5, 1);
    const TupleSet i2 = full_improper(3, 5, 2);
    const TupleSet a = lift(i1, 4);
    const TupleSet b = lift(i2, 2);
    ok = as_set(a) == as_set(full_improper(3, 5, 4)) && as_set(b) == as_set(full_improper(3, 5, 4));
    return "I(3,5,4) size " + std::to_string(a.size());
  });

  criterion(6, "(1..k) improper until (k+1) | l", [](bool& ok) {
    std::ostringstream d;
    const std::pair<int, std::vector<Residue>> rows[] = {{3, {7, 11, 13}}, {4, {7, 11, 13}}, {6, {11, 13, 17}}};
    for (const auto& [k, primes] : rows) {
      for (Residue p : primes) {
        std::vector<Residue> v;
        for (int i = 1; i <= k; ++i) v.push_back(static_cast<Residue>(i));
        for (Residue l = 1; l <= static_cast<Residue>(k + 1); ++l) {
          const ProperVerdict r = is_proper(SpeedTuple(v, AnsatzParams(k, p, l)));
          const bool divisible = l % static_cast<Residue>(k + 1) == 0;
          ok = ok && (divisible ? r.kind == ProperVerdict::Kind::ByWitness : r.is_improper());
          ok = ok && (oracle::improper(v, k, p, l) == !divisible);
        }
      }
      d << "k=" << k << " ";
    }
    return d.str() + "l=1..k+1";
  });

  criterion(7, "unit-pair statement on N_k", [](bool& ok) {
    std::ostringstream d;
    for (int k : {2, 4, 6}) {
      const PolyReport r = poly_check_all_exhaustive(k);
      ok = ok && r.counterexamples.empty() && r.checked == nk_size(k);
      d << "k=" << k << " exhaustive " << r.checked << "; ";
    }
    for (int k : {10, 12}) {
      const PolyReport r = poly_check_all_sample(k, 1'000'000, 1, std::max(1u, std::thread::hardware_concurrency()));
      ok = ok && r.counterexamples.empty() && r.checked == 1'000'000;
      d << "k=" << k << " sampled " << r.checked << "; ";
    }
    return d.str();
  });

  criterion(8, "r_k inclusion lists and discontinuity gaps", [](bool& ok) {
    for (Residue p : {103u, 107u, 109u}) ok = ok && rk_inclusion(10, p);
    for (Residue p : {149u, 151u}) ok = ok && rk_inclusion(12, p);
    for (Residue p = 111; p < 200; ++p) {
      if (oracle::is_prime(p)) ok = ok && rk_inclusion(10, p);
      if (p > 156 && oracle::is_prime(p)) ok = ok && rk_inclusion(12, p);
    }
    bool literal = true;
    for (int k = 2; k <= 12; ++k) {
      const DiscontinuityGaps g = discontinuity_gaps(k);
      const auto bound = static_cast<std::uint64_t>(k * (k + 1));
      ok = ok && g.after_grid_points.at_least(1, bound);
      literal = literal && g.consecutive.at_least(1, bound);
    }
    info(literal, "minimum gap between all consecutive jumps >= 1/(k(k+1)) for k <= 12 (k=3 gives 1/24)");
    return "gap measured from each grid point n/(k+1), k=2..12";
  });

  criterion(9, "exhaustive fiber certificates for the gate", [](bool& ok) {
    GateOptions o;
    o.exhaustive_cap = 200'000;
    const FiberCertificate a = certify_one_to_k(4, 23, o);
    const FiberCertificate b = certify_one_to_k(6, 47, o);
    ok = a.exhaustive && b.exhaustive && a.checked == 625 && b.checked == 117649 && a.improper == 0 &&
         b.improper == 0 && a.open() && b.open();
    return "checked " + std::to_string(a.checked) + " and " + std::to_string(b.checked);
  });

  criterion(10, "property suites", [](bool& ok) {
    std::ostringstream d;
    // Orbit invariance of the canonical form.
    {
      std::mt19937_64 rng(101);
      const Residue primes[] = {11, 29, 101, 127};
      int bad = 0;
      for (int t = 0; t < 100000; ++t) {
        const Residue p = primes[t % 4];
        const int k = 2 + t % 7;
        std::uniform_int_distribution<Residue> coord(1, p - 1);
        std::vector<Residue> v(static_cast<std::size_t>(k));
        for (auto& x : v) x = coord(rng);
        std::vector<Residue> w = v;
        std::shuffle(w.begin(), w.end(), rng);
        const Residue u = coord(rng);
        for (auto& x : w) {
          x = static_cast<Residue>(std::uint64_t{x} * u % p);
          if (rng() & 1) x = p - x;
        }
        bad += !(canonicalize(v, p) == canonicalize(w, p));
      }
      ok = ok && bad == 0;
      d << "orbit failures " << bad << "; ";
    }
    // Witness certificates against the brute-force check.
    {
      std::mt19937_64 rng(202);
      const Residue primes[] = {5, 7, 11, 13, 17};
      int bad = 0;
      for (int t = 0; t < 100000; ++t) {
        const int k = 2 + t % 6;
        const Residue p = primes[t % 5];
        const Residue l = 1 + (t / 5) % 6;
        const Residue lp = l * p;
        std::uniform_int_distribution<Residue> coord(1, lp - 1);
        std::vector<Residue> v(static_cast<std::size_t>(k));
        for (auto& x : v) {
          do x = coord(rng);
          while (x % p == 0);
        }
        const Residue a = std::uniform_int_distribution<Residue>(0, lp - 1)(rng);
        bad += witness_certificate_check(v, k, lp, a) != oracle::is_witness(v, a, lp, k);
      }
      ok = ok && bad == 0;
      d << "certificate failures " << bad << "; ";
    }
    ScratchDir dir("accept-props");
    // Byte-identical stage files across thread counts.
    {
      const auto diagram = parse_diagram("x2,x2,/4,x3");
      std::vector<std::string> reference;
      bool same = true;
      for (unsigned threads : {1u, 4u, 8u}) {
        RunOptions o;
        o.threads = threads;
        const fs::path run = dir.path() / ("t" + std::to_string(threads));
        const auto r = run_diagram(5, 29, diagram, run, o);
        std::vector<std::string> files;
        for (const auto& s : r.stages) files.push_back(read_file(run / s.file));
        if (reference.empty()) reference = files;
        same = same && files == reference;
      }
      for (unsigned threads : {4u, 8u}) {
        SieveOptions so;
        so.threads = threads;
        same = same && sieve_initial(6, 43, so).serialize() == sieve_initial(6, 43).serialize();
      }
      ok = ok && same;
      d << "threads {1,4,8} " << (same ? "identical" : "differ") << "; ";
    }
    // Resume from every stopping point.
    {
      const auto diagram = parse_diagram("x2,/2,x3,x2");
      const auto full = run_diagram(5, 23, diagram, dir.path() / "full");
      const std::string final_bytes = read_file(dir.path() / "full" / full.stages.back().file);
      bool same = true;
      for (std::size_t keep = 1; keep <= full.stages.size(); ++keep) {
        const fs::path run = dir.path() / ("r" + std::to_string(keep));
        RunOptions first;
        first.stop_after_steps = keep - 1;
        (void)run_diagram(5, 23, diagram, run, first);
        RunOptions again;
        again.resume = true;
        const auto r = run_diagram(5, 23, diagram, run, again);
        same = same && r.complete && read_file(run / r.stages.back().file) == final_bytes;
      }
      ok = ok && same;
      d << "resume " << (same ? "equivalent" : "differs");
    }
    return d.str();
  });

  // Not one of the numbered gates: a single full-scale prime with resume.
  criterion(11, "single k=10 prime at p=127 through the gate", [](bool& ok) {
    ScratchDir dir("accept-k10");
    PlanOptions o;
    o.workdir = dir.path();
    o.diagram = diagram_from_name_or_spec("k10");
    o.assume_literature = true;
    o.primes = std::vector<Residue>{127};
    o.threads = std::max(1u, std::thread::hardware_concurrency());
    // Interrupt after the sieve, then let the planner resume the run.
    RunOptions first;
    first.stop_after_steps = 0;
    (void)run_diagram(10, 127, o.diagram, dir.path() / "k10" / "p127", first);
    const VerdictLedger l = plan_primes(10, o);
    ok = l.certificates.size() == 1 && l.certificates[0].route == Route::OneToKPlusGate &&
         l.certificates[0].gate && l.certificates[0].gate->open() && verify_ledger(l, dir.path()).passed &&
         audit(l, dir.path()).passed;
    const auto& g = *l.certificates[0].gate;
    return std::string("route ") + to_string(l.certificates[0].route) + ", gate " + to_string(g.route) + " " +
           std::to_string(g.checked) + " fiber samples, 0 improper";
  });

  std::printf("%s: %d gated criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
