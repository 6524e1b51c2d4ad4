#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "thm/harness.hpp"
#include "thm/mesh.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Four-field WSIP dG solver for stationary "
               "thermo-poroelasticity on polygonal meshes"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  auto* gen = mesh_cmd->add_subcommand("generate",
                                       "Lloyd-relaxed Voronoi mesh of the "
                                       "unit square");
  int cells = 100;
  std::uint64_t seed = 42;
  int lloyd = 100;
  std::string mesh_out = "mesh.txt";
  gen->add_option("--cells", cells, "number of cells")->required();
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--lloyd", lloyd, "Lloyd relaxation iterations");
  gen->add_option("--out", mesh_out, "output path")->required();

  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string config_path, run_out;
  bool heavy = false;
  bool verbose = false;
  run->add_option("--config", config_path, "experiment config file")
      ->required();
  run->add_option("--out", run_out, "CSV output path (overrides config)");
  run->add_flag("--heavy", heavy, "include heavy sweep points");
  run->add_flag("--verbose", verbose, "print per-row progress");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      thm::PolyMesh mesh = thm::generate_voronoi(cells, thm::Rect{}, seed,
                                                 lloyd);
      thm::save_mesh(mesh, mesh_out);
      std::cout << "wrote " << mesh_out << ": " << mesh.n_cells()
                << " cells, " << mesh.n_faces() << " faces, h = "
                << mesh.max_h() << "\n";
      return 0;
    }
    if (*run) {
      thm::ExperimentConfig cfg = thm::load_config(config_path);
      if (!run_out.empty()) cfg.out = run_out;
      thm::ExperimentResult result = thm::run_experiment(cfg, heavy);
      if (verbose) {
        for (const auto& r : result.rows)
          std::cerr << r.kind << " " << thm::variant_name(r.variant)
                    << " ell=" << r.ell << " N=" << r.N << " -> " << r.status
                    << " (" << r.iters << " it)\n";
      }
      if (cfg.out.empty()) {
        std::cout << result.csv;
      } else {
        std::ofstream out(cfg.out, std::ios::binary);
        if (!out) {
          std::cerr << "cannot write " << cfg.out << "\n";
          return 2;
        }
        out << result.csv;
        std::cout << "wrote " << cfg.out << " (" << result.rows.size()
                  << " rows)\n";
      }
      return result.all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
