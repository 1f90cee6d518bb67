#pragma once

/*!
  \file commands.hpp
  \brief Subcommand implementations behind the `rsb` command-line tool.

  Each command writes its report to `out`, diagnostics to `err`, and returns
  the process exit code: 0 success, 1 input error, 2 infeasible, 3 internal
  verification failure.
*/

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "budget.hpp"
#include "circuit.hpp"
#include "flow_transform.hpp"
#include "mcf.hpp"
#include "oracle.hpp"
#include "power.hpp"
#include "retiming.hpp"

namespace rsb::cli
{

enum ExitCode : int
{
  ok = 0,
  input_error = 1,
  infeasible = 2,
  verification_failed = 3
};

inline std::string read_file( std::filesystem::path const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw InputError( "cannot open '" + path.string() + "'" );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file( std::filesystem::path const& path, std::string const& content )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw InputError( "cannot write '" + path.string() + "'" );
  out << content;
}

/*! \brief Built-in four-level curve on slacks {0, 10, 20, 33}. */
inline PowerSlackCurve default_curve()
{
  return PowerSlackCurve{ { { 0, 100 }, { 10, 60 }, { 20, 30 }, { 33, 10 } } };
}

/* sta */

struct StaOptions
{
  std::filesystem::path circuit;
  Time period{ 0 };
  std::optional<std::filesystem::path> slacks; ///< JSON object: gate name -> integer slack
};

inline int cmd_sta( StaOptions const& o, std::ostream& out, std::ostream& err )
{
  try
  {
    auto const c = parse_circuit( read_file( o.circuit ) );
    auto eff = c.delays();
    if ( o.slacks )
    {
      auto doc = nlohmann::json::parse( read_file( *o.slacks ), nullptr, false );
      if ( doc.is_discarded() || !doc.is_object() )
        throw InputError( "slack file must be a JSON object of gate -> slack" );
      for ( auto const& [name, value] : doc.items() )
      {
        auto id = c.find_gate( name );
        if ( !id )
          throw InputError( "slack given for unknown gate '" + name + "'" );
        if ( !value.is_number_integer() || value.get<Time>() < 0 )
          throw InputError( "slack for gate '" + name + "' must be a nonnegative integer" );
        eff[*id] += value.get<Time>();
      }
    }
    auto const rep = sta( c, o.period, eff );
    out << "gate arrival required slack\n";
    for ( auto i = 0; i < c.num_gates(); ++i )
      out << c.gate( i ).name << ' ' << rep.arrival[i] << ' ' << rep.required[i] << ' ' << rep.slack[i] << '\n';
    auto const feasible = rep.max_arrival() <= o.period;
    out << "period " << o.period << " max_arrival " << rep.max_arrival() << ( feasible ? " feasible" : " violated" ) << '\n';
    return feasible ? ok : infeasible;
  }
  catch ( InputError const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

/* retime */

struct RetimeOptions
{
  std::filesystem::path circuit;
  std::optional<Time> period;
};

inline int cmd_retime( RetimeOptions const& o, std::ostream& out, std::ostream& err )
{
  try
  {
    auto const c = parse_circuit( read_file( o.circuit ) );
    auto print_labels = [&]( Retiming const& r ) {
      for ( auto i = 0; i < c.num_gates(); ++i )
        out << "r " << c.gate( i ).name << ' ' << r.r[i] << '\n';
    };
    if ( !o.period )
    {
      auto const mp = min_period( c );
      out << "Tmin " << mp.period << '\n';
      print_labels( mp.retiming );
      return ok;
    }
    auto r = feasible_retiming( c, *o.period, c.delays() );
    if ( !r )
    {
      out << "infeasible\n";
      return infeasible;
    }
    out << "period " << *o.period << " feasible\n";
    print_labels( *r );
    return ok;
  }
  catch ( InputError const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

/* budget */

struct BudgetCommandOptions
{
  std::filesystem::path circuit;
  std::filesystem::path curves;
  std::optional<Time> period;
  bool check{ false };
  std::optional<std::filesystem::path> json;
};

/*! \brief Empty when the result passes every independent check, else the failure. */
inline std::string check_budget( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves, BudgetResult const& r )
{
  if ( auto msg = verify_result( c, period, curves, r ); !msg.empty() )
    return msg;
  auto const g = split_graph( c, period, curves, safe_nff( c, period, curves ) );
  auto const net = expand( g );
  auto const sol = solve_mcf( net );
  if ( auto msg = check_feasible( net, sol ); !msg.empty() )
    return "flow solution infeasible: " + msg;
  if ( has_negative_residual_cycle( net, sol ) )
    return "flow solution not optimal (negative residual cycle)";
  auto const ref = ssp_oracle( net );
  if ( ref.cost != sol.cost )
    return "flow cost " + std::to_string( sol.cost ) + " differs from oracle cost " + std::to_string( ref.cost );
  return {};
}

inline int cmd_budget( BudgetCommandOptions const& o, std::ostream& out, std::ostream& err )
{
  try
  {
    auto const c = parse_circuit( read_file( o.circuit ) );
    auto const curves = parse_curves( read_file( o.curves ) ).resolve( c );

    auto const tmin = min_period( c, curves ).period;
    auto const period = o.period.value_or( tmin );
    if ( period < tmin )
    {
      out << "infeasible: period " << period << " below Tmin " << tmin << '\n';
      return infeasible;
    }
    auto const result = run_budget( c, curves, { period, std::nullopt } );

    out << "period " << period << '\n';
    out << "total_power " << result.assignment.total_power() << '\n';
    out << "total_slack " << result.assignment.total_slack() << '\n';
    out << "repair_steps " << result.diagnostics.repair_steps << '\n';
    out << "runtime_ms " << std::fixed << std::setprecision( 3 ) << result.diagnostics.runtime_ms << '\n';
    if ( o.json )
      write_file( *o.json, result_to_json( c, result ).dump( 2 ) + "\n" );

    if ( o.check )
    {
      if ( auto msg = check_budget( c, period, curves, result ); !msg.empty() )
      {
        out << "check failed: " << msg << '\n';
        return verification_failed;
      }
      out << "check passed\n";
    }
    return ok;
  }
  catch ( InputError const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::overflow_error const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::logic_error const& e )
  {
    err << "internal error: " << e.what() << '\n';
    return verification_failed;
  }
}

/* bench */

struct BenchOptions
{
  int gen{ -1 }; ///< number of generated cases; < 0 when --dir is used
  std::optional<std::filesystem::path> dir;
  std::uint64_t seed{ 1 };
  std::optional<std::filesystem::path> levels; ///< curve file; its "default" entry applies to every gate
  std::optional<std::filesystem::path> csv;
  int min_gates{ 5 };
  int max_gates{ 10 };
  int oracle_limit{ 10 }; ///< run the exact oracle up to this many gates
  bool deterministic{ false }; ///< write 0 in the runtime column
};

struct BenchRow
{
  std::string name;
  int gates{ 0 };
  int edges{ 0 };
  Time tmin{ 0 };
  std::int64_t power_flow{ 0 };
  std::optional<std::int64_t> power_oracle;
  Time slack_flow{ 0 };
  std::optional<Time> slack_oracle;
  double runtime_ms{ 0.0 };
};

inline std::string const bench_header = "name,gates,edges,Tmin,power_flow,power_oracle,slack_flow,slack_oracle,runtime_ms";

inline BenchRow bench_case( std::string name, Circuit const& c, std::vector<PowerSlackCurve> const& curves, int oracle_limit )
{
  BenchRow row;
  row.name = std::move( name );
  row.gates = c.num_gates();
  row.edges = c.num_edges();
  row.tmin = min_period( c, curves ).period;
  auto const r = run_budget( c, curves, { row.tmin, std::nullopt } );
  if ( auto msg = verify_result( c, row.tmin, curves, r ); !msg.empty() )
    throw std::logic_error( "bench case " + row.name + ": " + msg );
  row.power_flow = r.assignment.total_power();
  row.slack_flow = r.assignment.total_slack();
  row.runtime_ms = r.diagnostics.runtime_ms;
  auto const levels_ok = std::all_of( curves.begin(), curves.end(), []( auto const& cv ) { return cv.size() <= oracle::max_budget_levels; } );
  if ( c.num_gates() <= std::min( oracle_limit, oracle::max_budget_gates ) && levels_ok )
  {
    if ( auto best = oracle::brute_force( c, row.tmin, curves ) )
    {
      row.power_oracle = best->power;
      row.slack_oracle = best->assignment.total_slack();
    }
  }
  return row;
}

inline std::string percent( double ratio )
{
  std::ostringstream os;
  auto const pct = ( ratio - 1.0 ) * 100.0;
  os << ( pct >= 0 ? "+" : "" ) << std::llround( pct ) << '%';
  return os.str();
}

inline std::string render_bench_csv( std::vector<BenchRow> const& rows, bool deterministic )
{
  std::ostringstream os;
  os << bench_header << '\n';
  auto opt = [&]( auto const& v ) { return v ? std::to_string( *v ) : std::string{}; };
  for ( auto const& r : rows )
  {
    os << r.name << ',' << r.gates << ',' << r.edges << ',' << r.tmin << ',' << r.power_flow << ',' << opt( r.power_oracle ) << ','
       << r.slack_flow << ',' << opt( r.slack_oracle ) << ',' << std::fixed << std::setprecision( 3 )
       << ( deterministic ? 0.0 : r.runtime_ms ) << '\n';
    os.unsetf( std::ios::floatfield );
  }
  if ( rows.empty() )
    return os.str();

  auto mean = [&]( auto field ) {
    double sum = 0;
    int count = 0;
    for ( auto const& r : rows )
      if ( auto v = field( r ) )
      {
        sum += static_cast<double>( *v );
        ++count;
      }
    return count ? std::optional<double>( sum / count ) : std::nullopt;
  };
  auto fmt = []( std::optional<double> v ) {
    if ( !v )
      return std::string{};
    std::ostringstream s;
    s << std::fixed << std::setprecision( 1 ) << *v;
    return s.str();
  };
  using Opt = std::optional<double>;
  auto const gates = mean( []( BenchRow const& r ) { return Opt( r.gates ); } );
  auto const edges = mean( []( BenchRow const& r ) { return Opt( r.edges ); } );
  auto const tmin = mean( []( BenchRow const& r ) { return Opt( r.tmin ); } );
  auto const pf = mean( []( BenchRow const& r ) { return Opt( r.power_flow ); } );
  auto const po = mean( []( BenchRow const& r ) { return r.power_oracle ? Opt( *r.power_oracle ) : Opt(); } );
  auto const sf = mean( []( BenchRow const& r ) { return Opt( r.slack_flow ); } );
  auto const so = mean( []( BenchRow const& r ) { return r.slack_oracle ? Opt( *r.slack_oracle ) : Opt(); } );
  auto const rt = mean( [&]( BenchRow const& r ) { return Opt( deterministic ? 0.0 : r.runtime_ms ); } );
  os << "Avg," << fmt( gates ) << ',' << fmt( edges ) << ',' << fmt( tmin ) << ',' << fmt( pf ) << ',' << fmt( po ) << ',' << fmt( sf ) << ','
     << fmt( so ) << ',' << std::fixed << std::setprecision( 3 ) << *rt << '\n';

  /* gaps relative to the oracle, over cases that have an oracle value */
  auto const pf_o = mean( []( BenchRow const& r ) { return r.power_oracle ? Opt( r.power_flow ) : Opt(); } );
  auto const sf_o = mean( []( BenchRow const& r ) { return r.slack_oracle ? Opt( r.slack_flow ) : Opt(); } );
  os << "Diff,,,,";
  os << ( po && *po > 0 ? percent( *pf_o / *po ) : std::string{} ) << ',' << ( po ? "1" : "" ) << ',';
  os << ( so && *so > 0 ? percent( *sf_o / *so ) : std::string{} ) << ',' << ( so ? "1" : "" ) << ",\n";
  return os.str();
}

inline GeneratorParams bench_generator_params( std::uint64_t seed, int index, int min_gates, int max_gates )
{
  std::mt19937_64 rng( seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>( index ) );
  GeneratorParams p;
  p.num_gates = min_gates + static_cast<int>( rng() % static_cast<std::uint64_t>( max_gates - min_gates + 1 ) );
  p.edge_density = 1.2 + static_cast<double>( rng() % 11 ) / 10.0;
  p.ff_prob = 0.3;
  p.min_delay = 5;
  p.max_delay = 30;
  p.seed = rng();
  return p;
}

inline int cmd_bench( BenchOptions const& o, std::ostream& out, std::ostream& err )
{
  try
  {
    auto curve = default_curve();
    if ( o.levels )
    {
      auto lib = parse_curves( read_file( *o.levels ) );
      if ( !lib.fallback )
        throw InputError( "bench curve file needs a \"default\" entry" );
      curve = *lib.fallback;
    }
    if ( o.min_gates < 1 || o.max_gates < o.min_gates )
      throw InputError( "invalid gate range" );

    std::vector<BenchRow> rows;
    if ( o.dir )
    {
      std::vector<std::filesystem::path> files;
      for ( auto const& entry : std::filesystem::directory_iterator( *o.dir ) )
        if ( entry.is_regular_file() && entry.path().extension() == ".circ" )
          files.push_back( entry.path() );
      std::sort( files.begin(), files.end() );
      for ( auto const& f : files )
      {
        auto const c = parse_circuit( read_file( f ) );
        rows.push_back( bench_case( f.stem().string(), c, std::vector<PowerSlackCurve>( c.num_gates(), curve ), o.oracle_limit ) );
      }
    }
    else
    {
      for ( auto i = 0; i < o.gen; ++i )
      {
        auto const c = generate_random( bench_generator_params( o.seed, i, o.min_gates, o.max_gates ) );
        std::ostringstream name;
        name << "gen_" << std::setw( 4 ) << std::setfill( '0' ) << i;
        rows.push_back( bench_case( name.str(), c, std::vector<PowerSlackCurve>( c.num_gates(), curve ), o.oracle_limit ) );
      }
    }
    std::sort( rows.begin(), rows.end(), []( auto const& a, auto const& b ) { return a.name < b.name; } );

    auto const csv = render_bench_csv( rows, o.deterministic );
    if ( o.csv )
      write_file( *o.csv, csv );
    else
      out << csv;
    return ok;
  }
  catch ( InputError const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::overflow_error const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::logic_error const& e )
  {
    err << "internal error: " << e.what() << '\n';
    return verification_failed;
  }
}

/* flow debugging */

struct DimacsOptions
{
  std::filesystem::path circuit;
  std::filesystem::path curves;
  std::optional<Time> period;
};

inline int cmd_dimacs( DimacsOptions const& o, std::ostream& out, std::ostream& err )
{
  try
  {
    auto const c = parse_circuit( read_file( o.circuit ) );
    auto const curves = parse_curves( read_file( o.curves ) ).resolve( c );
    auto const period = o.period.value_or( min_period( c, curves ).period );
    write_dimacs( out, expand( split_graph( c, period, curves, safe_nff( c, period, curves ) ) ) );
    return ok;
  }
  catch ( InputError const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::overflow_error const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

struct McfOptions
{
  std::filesystem::path network;
  bool check{ false };
};

inline int cmd_mcf( McfOptions const& o, std::ostream& out, std::ostream& err )
{
  try
  {
    std::istringstream in( read_file( o.network ) );
    auto const net = read_dimacs( in );
    auto const sol = solve_mcf( net );
    out << "cost " << sol.cost << '\n';
    out << "phases " << sol.stats.phases << " pushes " << sol.stats.pushes << " relabels " << sol.stats.relabels << '\n';
    if ( o.check )
    {
      auto const ref = ssp_oracle( net );
      if ( ref.cost != sol.cost || !check_feasible( net, sol ).empty() )
      {
        out << "check failed: oracle cost " << ref.cost << '\n';
        return verification_failed;
      }
      out << "check passed\n";
    }
    return ok;
  }
  catch ( InputError const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::overflow_error const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
  catch ( std::invalid_argument const& e )
  {
    err << "error: " << e.what() << '\n';
    return input_error;
  }
}

} // namespace rsb::cli
