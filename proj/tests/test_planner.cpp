// test_planner.cpp

#include <doctest.h>

#include <fstream>

#include "lrc/digest.hpp"
#include "lrc/planner.hpp"
#include "scratch_dir.hpp"
#include "table1.hpp"

using namespace lrc;
namespace fs = std::filesystem;

namespace {

mpz_class product_of(const std::vector<Residue>& primes) {
  mpz_class x = 1;
  for (Residue p : primes) x *= p;
  return x;
}

PlanOptions options_for(const fs::path& dir, const char* diagram) {
  PlanOptions o;
  o.workdir = dir;
  o.diagram = parse_diagram(diagram);
  return o;
}

}  // namespace

TEST_CASE("bound values") {
  const BoundValue b3 = compute_bound(3);
  CHECK(b3.numerator == 1728);
  CHECK(b3.denominator == 1);
  CHECK(b3.met_by(1728));
  CHECK_FALSE(b3.met_by(1727));
  const BoundValue b4 = compute_bound(4);
  CHECK(b4.numerator == mpz_class("3906250000"));
  CHECK(b4.denominator == 1);
  // k = 5: (15^4 / 5)^5 is an integer; k = 7: 28^6 / 7 is not reduced by 7^7 fully.
  for (int k = 3; k <= 12; ++k) {
    const BoundValue b = compute_bound(k);
    mpz_class num, den, c = k * (k + 1) / 2;
    mpz_pow_ui(num.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(k - 1) * k);
    mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(k), static_cast<unsigned long>(k));
    CHECK(b.numerator * den == num * b.denominator);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), b.numerator.get_mpz_t(), b.denominator.get_mpz_t());
    CHECK(g == 1);
  }
  CHECK(compute_bound(10).ln < 338);
  CHECK(compute_bound(11).ln < 435);
  CHECK(compute_bound(12).ln < 546);
  CHECK(format_ln(compute_bound(3).ln) == "7.454720");
  CHECK_THROWS_AS(compute_bound(2), Error);
}

TEST_CASE("published prime sets meet their bounds exactly") {
  const std::pair<int, const std::vector<Residue>*> rows[] = {
      {10, &table1::kPrimes10}, {11, &table1::kPrimes11}, {12, &table1::kPrimes12}};
  const double ln_floor[] = {342, 435, 547};
  int i = 0;
  for (auto [k, primes] : rows) {
    const mpz_class prod = product_of(*primes);
    const BoundValue b = compute_bound(k);
    CHECK(b.met_by(prod));
    CHECK(ln_of(prod) > ln_floor[i++]);
    // Dropping the largest prime falls short.
    CHECK_FALSE(b.met_by(prod / primes->back()));
  }
}

TEST_CASE("ledger round-trip") {
  VerdictLedger l;
  l.k = 10;
  l.diagram = "x2,x2,x2,/8,gate";
  l.dependency = {Dependency::Kind::Literature, "published proof of LRC(9)"};
  l.bound = compute_bound(10);
  Certificate c;
  c.prime = 127;
  c.route = Route::OneToKPlusGate;
  c.run = "k10/p127";
  c.manifest_sha256 = std::string(64, 'a');
  c.final_sha256 = std::string(64, 'b');
  FiberCertificate g;
  g.k = 10;
  g.p = 127;
  g.seed = 5;
  g.checked = 10;
  g.by_witness = 9;
  g.decomposed = 9;
  g.by_gcd = 1;
  c.gate = g;
  l.certificates.push_back(c);
  l.skipped.push_back({131, "diagram left 3 survivors"});
  l.product = 127;
  const std::string text = l.serialize();
  const VerdictLedger back = VerdictLedger::parse(text);
  CHECK(back.serialize() == text);
  CHECK(back.certificates.size() == 1);
  CHECK(back.certificates[0].gate->seed == 5);
  CHECK(text.find("deficit_ln=") != std::string::npos);
  CHECK_THROWS_AS(VerdictLedger::parse("garbage\n"), Error);
  CHECK_THROWS_AS(VerdictLedger::parse(text.substr(0, text.find("product"))), Error);
}

TEST_CASE("dependency resolution") {
  ScratchDir dir("planner-dep");
  CHECK(resolve_dependency(3, dir.path(), false).kind == Dependency::Kind::Trivial);
  CHECK(resolve_dependency(8, dir.path(), true).kind == Dependency::Kind::Literature);
  try {
    (void)resolve_dependency(5, dir.path(), false);
    FAIL("expected usage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Usage);
  }
  CHECK_THROWS_AS(resolve_dependency(11, dir.path(), true), Error);
}

TEST_CASE("LRC(3) and LRC(4) campaigns, verification and audit") {
  ScratchDir dir("planner-campaign");
  RunLog log(dir.path() / "run.log");
  auto o3 = options_for(dir.path(), "x2,x2");
  o3.log = &log;
  const VerdictLedger l3 = plan_primes(3, o3);
  CHECK(l3.verdict == Verdict::Verified);
  CHECK(l3.dependency.kind == Dependency::Kind::Trivial);
  std::vector<Residue> primes3;
  for (const auto& c : l3.certificates) {
    primes3.push_back(c.prime);
    CHECK(c.route == Route::DiagramEmpty);
  }
  // Regression fixture from the first verified run.
  CHECK(primes3 == std::vector<Residue>{7, 11, 13, 17});
  REQUIRE(l3.skipped.size() == 1);
  CHECK(l3.skipped[0].prime == 5);

  auto o4 = options_for(dir.path(), "x2,x2,/4,x5");
  const VerdictLedger l4 = plan_primes(4, o4);
  CHECK(l4.verdict == Verdict::Verified);
  CHECK(l4.dependency.kind == Dependency::Kind::VerifiedHere);
  std::vector<Residue> primes4;
  for (const auto& c : l4.certificates) primes4.push_back(c.prime);
  CHECK(primes4 == std::vector<Residue>{13, 17, 19, 23, 29, 31, 37, 41});

  CHECK(VerdictLedger::load(ledger_path(dir.path(), 4)).serialize() == l4.serialize());
  CHECK(verify_ledger(l4, dir.path()).passed);
  const CheckReport a = audit(l4, dir.path());
  for (const auto& line : a.lines) CAPTURE(line);
  CHECK(a.passed);

  const auto records = read_log(dir.path() / "run.log");
  bool saw_skip = false;
  for (const auto& r : records) saw_skip = saw_skip || r.fields.at("event") == "prime_skipped";
  CHECK(saw_skip);

  SUBCASE("a truncated stage file fails the digest check") {
    const fs::path stage = dir.path() / "k3" / "p11" / "S2.txt";
    fs::resize_file(stage, fs::file_size(stage) / 2);
    const CheckReport r = audit(l3, dir.path());
    CHECK_FALSE(r.passed);
    bool named = false;
    for (const auto& line : r.lines) {
      named = named || (line.rfind("FAIL", 0) == 0 && line.find("p=11") != std::string::npos &&
                        line.find("digest") != std::string::npos);
    }
    CHECK(named);
  }
  SUBCASE("removing the last prime fails the bound comparison") {
    VerdictLedger cut = l3;
    cut.certificates.pop_back();
    const CheckReport r = audit(cut, dir.path());
    CHECK_FALSE(r.passed);
    bool named = false;
    for (const auto& line : r.lines) {
      named = named || (line.rfind("FAIL", 0) == 0 && line.find("bound") != std::string::npos);
    }
    CHECK(named);
  }
  SUBCASE("a forged survivor list fails the fiber re-check") {
    // Replace the final stage by a nonempty one and re-point the digests.
    const fs::path run = dir.path() / "k3" / "p13";
    Manifest m = Manifest::load(run / kManifestName);
    const fs::path last = run / m.stages.back().file;
    TupleSet fake = TupleSet::from_flat(AnsatzParams(3, 13, 4), m.stages.back().label, {1, 2, 3});
    fake.save_atomic(last);
    m.stages.back().digest = sha256_file(last);
    m.stages.back().output_count = 1;
    m.save(run / kManifestName);
    VerdictLedger forged = l3;
    for (auto& c : forged.certificates) {
      if (c.prime == 13) {
        c.manifest_sha256 = sha256_file(run / kManifestName);
        c.final_sha256 = m.stages.back().digest;
      }
    }
    const CheckReport r = audit(forged, dir.path());
    CHECK_FALSE(r.passed);
  }
  SUBCASE("a duplicated prime fails verification") {
    VerdictLedger dup = l3;
    dup.certificates.push_back(dup.certificates.front());
    dup.product *= dup.certificates.front().prime;
    CHECK_FALSE(verify_ledger(dup, dir.path()).passed);
  }
}

TEST_CASE("explicit prime lists, skips and inconclusive verdicts") {
  ScratchDir dir("planner-explicit");
  auto o = options_for(dir.path(), "x2,x2");
  o.primes = std::vector<Residue>{5, 9, 7, 7};
  const VerdictLedger l = plan_primes(3, o);
  CHECK(l.verdict == Verdict::Inconclusive);
  CHECK(l.certificates.size() == 1);
  CHECK(l.skipped.size() == 2);
  CHECK(l.product == 7);
  CHECK(verify_ledger(l, dir.path()).passed);
  CHECK(audit(l, dir.path()).passed);
  const std::string text = read_file(ledger_path(dir.path(), 3));
  CHECK(text.find("verdict value=inconclusive deficit_ln=") != std::string::npos);
}

TEST_CASE("gate policy skips primes that fail both conditions") {
  ScratchDir dir("planner-gate");
  auto o = options_for(dir.path(), "x2,/2,gate");
  o.assume_literature = true;
  o.primes = std::vector<Residue>{11, 13};
  const VerdictLedger l = plan_primes(4, o);
  // k = 4: 11 and 13 are below k(k+1) = 20; the skip reason names the failed condition.
  for (const auto& s : l.skipped) {
    if (!rk_inclusion(4, s.prime)) CHECK(s.reason.find("gate closed") != std::string::npos);
  }
  CHECK(l.certificates.size() + l.skipped.size() == 2);
}
