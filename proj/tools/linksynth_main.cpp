// linksynth CLI: solve / check / classify / gen / oracle / reduce-nae3sat.
//
// Exit codes: 0 success, 1 I/O or data error, 2 usage error, 3 semantic
// failure (check not ok, oracle unsatisfiable, solve with join inequality or
// DC violations).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "linksynth/benchgen.hpp"
#include "linksynth/oracle.hpp"
#include "linksynth/pipeline.hpp"

namespace {

using namespace linksynth;

struct Inputs {
  std::string r1, r2, constraints;
};

void addInputFlags(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--r1", in.r1, "R1 CSV (schema sidecar <name>.schema.json)")->required();
  cmd->add_option("--r2", in.r2, "R2 CSV (schema sidecar <name>.schema.json)")->required();
  cmd->add_option("--constraints", in.constraints, "constraint JSON document")->required();
}

struct Loaded {
  Relation r1;
  Relation r2;
  ConstraintSet cs;
};

Loaded loadInputs(const Inputs& in) {
  Relation r1 = loadRelation(in.r1);
  Relation r2 = loadRelation(in.r2);
  ConstraintSet cs = parseConstraints(readJson(in.constraints), r1.schema(), r2.schema());
  return {std::move(r1), std::move(r2), std::move(cs)};
}

uint64_t envSeedOr(uint64_t seed) {
  if (const char* env = std::getenv("LINKSYNTH_SEED")) {
    char* end = nullptr;
    uint64_t v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && *env != '\0') return v;
    fail(Errc::Parse, std::string("LINKSYNTH_SEED is not an integer: ") + env);
  }
  return seed;
}

std::string joinPath(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensureDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::Io, "cannot create directory " + dir + ": " + ec.message());
}

int runSolve(const Inputs& in, const std::string& outDir, SolveConfig cfg) {
  Loaded ld = loadInputs(in);
  cfg.seed = envSeedOr(cfg.seed);
  SolveResult res = solveHybrid(ld.r1, ld.r2, ld.cs, cfg);
  ensureDir(outDir);
  writeRelation(res.r1Hat, joinPath(outDir, "r1_completed.csv"));
  writeRelation(res.r2Hat, joinPath(outDir, "r2_augmented.csv"));
  writeFile(joinPath(outDir, "report.json"), solveReportJson(res.report));
  if (cfg.dumpLp) writeFile(joinPath(outDir, "system.lp"), res.report.lpDump);
  bool ok = res.report.dc.fraction() == 0 && res.report.joinConsistent;
  if (!ok)
    std::cerr << "solve finished with dcError=" << res.report.dc.fraction()
              << " joinConsistent=" << (res.report.joinConsistent ? "true" : "false") << "\n";
  return ok ? 0 : 3;
}

int runCheck(const Inputs& in) {
  Loaded ld = loadInputs(in);
  CheckReport rep = checkSolution(ld.r1, ld.r2, ld.cs);
  std::cout << checkReportJson(rep);
  return rep.ok ? 0 : 3;
}

int runClassify(const Inputs& in, const std::string& outDir) {
  Loaded ld = loadInputs(in);
  auto matrix = classifyAll(ld.cs.ccs);
  HasseForest forest = buildHasseForest(ld.cs.ccs, matrix);
  HybridSplit split = computeHybridSplit(ld.cs.ccs, forest, matrix);

  nlohmann::json pairs = nlohmann::json::array();
  for (size_t i = 0; i < matrix.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (size_t j = 0; j < matrix[i].size(); ++j) row.push_back(pairKindName(matrix[i][j]));
    pairs.push_back(std::move(row));
  }
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& cc : ld.cs.ccs) ids.push_back(cc.id);
  nlohmann::json doc{{"ids", ids},
                     {"pairs", pairs},
                     {"diagrams", forest.diagrams.size()},
                     {"s1", split.s1},
                     {"s2", split.s2}};
  std::string dot = forestToDot(ld.cs.ccs, forest);
  std::cout << doc.dump(2) << "\n";
  if (!outDir.empty()) {
    ensureDir(outDir);
    writeFile(joinPath(outDir, "classify.json"), doc.dump(2) + "\n");
    writeFile(joinPath(outDir, "forest.dot"), dot);
  }
  return 0;
}

int runGen(const BenchConfig& cfgIn, const std::string& outDir) {
  BenchConfig cfg = cfgIn;
  cfg.seed = envSeedOr(cfg.seed);
  GeneratedInstance gi = generateInstance(cfg);
  ensureDir(outDir);
  writeRelation(gi.r1, joinPath(outDir, "r1.csv"));
  writeRelation(gi.r2, joinPath(outDir, "r2.csv"));
  writeRelation(gi.r1Truth, joinPath(outDir, "truth.csv"));
  writeFile(joinPath(outDir, "constraints.json"), gi.constraintsJson.dump(2) + "\n");
  writeFile(joinPath(outDir, "config.json"), benchConfigJson(cfg).dump(2) + "\n");
  return 0;
}

int runOracle(const Inputs& in) {
  Loaded ld = loadInputs(in);
  OracleResult res = bruteForceDecide(ld.r1, ld.r2, ld.cs);
  nlohmann::json doc{{"sat", res.sat}, {"explored", res.explored}};
  if (res.sat) {
    nlohmann::json fk = nlohmann::json::array();
    for (int64_t k : res.fk) fk.push_back(k);
    doc["fk"] = std::move(fk);
  }
  std::cout << doc.dump(2) << "\n";
  return res.sat ? 0 : 3;
}

int runReduce(const std::string& cnfPath, const std::string& outDir) {
  Nae3SatFormula f = parseDimacs(readFile(cnfPath));
  ReducedInstance inst = reduceNae3Sat(f);
  ensureDir(outDir);
  writeRelation(inst.r1, joinPath(outDir, "r1.csv"));
  writeRelation(inst.r2, joinPath(outDir, "r2.csv"));
  writeFile(joinPath(outDir, "constraints.json"), constraintsToJson(inst.cs).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linksynth: complete a missing foreign-key column under denial and cardinality "
               "constraints"};
  app.require_subcommand(1);

  Inputs in;
  std::string outDir = "out";
  SolveConfig solveCfg;
  std::string marginals = "modified";

  CLI::App* solve = app.add_subcommand(
      "solve", "run the two-phase pipeline; writes r1_completed.csv, r2_augmented.csv, report.json");
  addInputFlags(solve, in);
  solve->add_option("-o,--out", outDir, "output directory")->capture_default_str();
  solve->add_option("--seed", solveCfg.seed, "deterministic seed (LINKSYNTH_SEED overrides)")
      ->capture_default_str();
  solve->add_option("--marginals", marginals, "marginal mode: all-way | modified | none")
      ->check(CLI::IsMember({"all-way", "modified", "none"}))
      ->capture_default_str();
  solve->add_option("--ilp-budget-nodes", solveCfg.budget.maxNodes, "search node budget")
      ->capture_default_str();
  solve->add_option("--ilp-budget-seconds", solveCfg.budget.maxSeconds, "search time budget")
      ->capture_default_str();
  solve->add_flag("--dump-lp", solveCfg.dumpLp, "also write system.lp (sparse row dump)");
  solve
      ->add_option("--parallel-partitions", solveCfg.parallelPartitions,
                   "color partitions with this many worker threads")
      ->capture_default_str();

  CLI::App* check =
      app.add_subcommand("check", "re-evaluate CC/DC errors of a completed instance");
  addInputFlags(check, in);

  CLI::App* classify =
      app.add_subcommand("classify", "pairwise CC classification matrix and Hasse forest");
  addInputFlags(classify, in);
  std::string classifyOut;
  classify->add_option("-o,--out", classifyOut, "directory for classify.json and forest.dot");

  BenchConfig genCfg;
  std::string dcSet = "good8", ccSet = "good";
  CLI::App* gen = app.add_subcommand(
      "gen", "generate a benchmark instance; writes r1/r2/truth CSVs, constraints.json, config.json");
  gen->add_option("-o,--out", outDir, "output directory")->capture_default_str();
  gen->add_option("--scale", genCfg.scale, "data scale (1.0 = 25,099 persons)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--seed", genCfg.seed, "deterministic seed (LINKSYNTH_SEED overrides)")
      ->capture_default_str();
  gen->add_option("--dc-set", dcSet, "DC set: good8 | all12")
      ->check(CLI::IsMember({"good8", "all12"}))
      ->capture_default_str();
  gen->add_option("--cc-set", ccSet, "CC template set: good | bad")
      ->check(CLI::IsMember({"good", "bad"}))
      ->capture_default_str();
  gen->add_option("--cc-count", genCfg.ccCount, "number of CCs to instantiate")
      ->capture_default_str();
  gen->add_option("--extra-r2-columns", genCfg.extraR2Columns, "extra housing columns (0-8)")
      ->check(CLI::Range(0, 8))
      ->capture_default_str();

  CLI::App* oracle =
      app.add_subcommand("oracle", "brute-force decide satisfiability (small instances only)");
  addInputFlags(oracle, in);

  std::string cnfPath;
  CLI::App* reduce = app.add_subcommand(
      "reduce-nae3sat", "reduce a DIMACS 3-CNF to a completion instance (r1/r2/constraints)");
  reduce->add_option("--cnf", cnfPath, "DIMACS CNF file (exactly 3 literals per clause)")
      ->required();
  reduce->add_option("-o,--out", outDir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (solve->parsed()) {
      solveCfg.marginals = marginals == "all-way"  ? MarginalMode::AllWay
                           : marginals == "none"   ? MarginalMode::None
                                                   : MarginalMode::Modified;
      return runSolve(in, outDir, solveCfg);
    }
    if (check->parsed()) return runCheck(in);
    if (classify->parsed()) return runClassify(in, classifyOut);
    if (gen->parsed()) {
      genCfg.dcSet = dcSet == "all12" ? DcSet::All12 : DcSet::Good8;
      genCfg.ccSet = ccSet == "bad" ? CcSet::Bad : CcSet::Good;
      return runGen(genCfg, outDir);
    }
    if (oracle->parsed()) return runOracle(in);
    if (reduce->parsed()) return runReduce(cnfPath, outDir);
  } catch (const linksynth::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
