#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <rsb/commands.hpp>

int main( int argc, char** argv )
{
  using namespace rsb::cli;

  CLI::App app{ "rsb: simultaneous retiming and slack budgeting for low power" };
  app.require_subcommand( 1 );

  StaOptions sta_opts;
  auto* sta = app.add_subcommand( "sta", "static timing report at a given period" );
  sta->add_option( "circuit", sta_opts.circuit, "circuit file" )->required();
  sta->add_option( "--period", sta_opts.period, "clock period" )->required();
  sta->add_option( "--slacks", sta_opts.slacks, "JSON object of gate -> budgeted slack" );

  RetimeOptions retime_opts;
  auto* retime = app.add_subcommand( "retime", "minimum-period retiming, or a retiming for --period" );
  retime->add_option( "circuit", retime_opts.circuit, "circuit file" )->required();
  retime->add_option( "--period", retime_opts.period, "target period" );

  BudgetCommandOptions budget_opts;
  auto* budget = app.add_subcommand( "budget", "minimize power by retiming and slack budgeting" );
  budget->add_option( "circuit", budget_opts.circuit, "circuit file" )->required();
  budget->add_option( "curves", budget_opts.curves, "power-slack curve JSON" )->required();
  budget->add_option( "--period", budget_opts.period, "clock period (default: minimum period)" );
  budget->add_flag( "--check", budget_opts.check, "re-verify with the reference flow solver and an independent timing check" );
  budget->add_option( "--json", budget_opts.json, "write the result document to this path" );

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand( "bench", "benchmark on generated circuits or a directory of .circ files" );
  auto* gen = bench->add_option( "--gen", bench_opts.gen, "number of generated cases" );
  auto* dir = bench->add_option( "--dir", bench_opts.dir, "directory of .circ files" );
  gen->excludes( dir );
  bench->add_option( "--seed", bench_opts.seed, "generator seed" );
  bench->add_option( "--levels", bench_opts.levels, "curve JSON whose \"default\" entry is used for every gate" );
  bench->add_option( "--csv", bench_opts.csv, "write the CSV here instead of stdout" );
  bench->add_option( "--min-gates", bench_opts.min_gates, "smallest generated circuit" );
  bench->add_option( "--max-gates", bench_opts.max_gates, "largest generated circuit" );
  bench->add_option( "--oracle-limit", bench_opts.oracle_limit, "run the exact oracle up to this many gates" );
  bench->add_flag( "--deterministic", bench_opts.deterministic, "write 0 in the runtime column" );

  DimacsOptions dimacs_opts;
  auto* dimacs = app.add_subcommand( "dimacs", "dump the expanded flow network in DIMACS min-cost-flow format" );
  dimacs->add_option( "circuit", dimacs_opts.circuit, "circuit file" )->required();
  dimacs->add_option( "curves", dimacs_opts.curves, "power-slack curve JSON" )->required();
  dimacs->add_option( "--period", dimacs_opts.period, "clock period (default: minimum period)" );

  McfOptions mcf_opts;
  auto* mcf = app.add_subcommand( "mcf", "solve a DIMACS min-cost circulation" );
  mcf->add_option( "network", mcf_opts.network, "DIMACS file" )->required();
  mcf->add_flag( "--check", mcf_opts.check, "cross-check against the successive-shortest-path solver" );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::ParseError const& e )
  {
    auto code = app.exit( e );
    return code == 0 ? 0 : input_error;
  }

  if ( *sta )
    return cmd_sta( sta_opts, std::cout, std::cerr );
  if ( *retime )
    return cmd_retime( retime_opts, std::cout, std::cerr );
  if ( *budget )
    return cmd_budget( budget_opts, std::cout, std::cerr );
  if ( *bench )
  {
    if ( bench_opts.gen < 0 && !bench_opts.dir )
    {
      std::cerr << "error: bench needs --gen or --dir\n";
      return input_error;
    }
    return cmd_bench( bench_opts, std::cout, std::cerr );
  }
  if ( *dimacs )
    return cmd_dimacs( dimacs_opts, std::cout, std::cerr );
  if ( *mcf )
    return cmd_mcf( mcf_opts, std::cout, std::cerr );
  return input_error;
}
