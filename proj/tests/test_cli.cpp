#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>

#include "support.hpp"

using namespace rsb;
using namespace rsb::cli;
namespace fs = std::filesystem;

namespace
{

fs::path const data = RSB_DATA_DIR;

struct Run
{
  int code;
  std::string out;
  std::string err;
};

template<class Options, class Fn>
Run run( Fn fn, Options const& o )
{
  std::ostringstream out, err;
  auto code = fn( o, out, err );
  return { code, out.str(), err.str() };
}

fs::path scratch( std::string const& name )
{
  auto dir = fs::temp_directory_path() / "rsb_cli_test";
  fs::create_directories( dir );
  return dir / name;
}

int binary_exit( std::string const& args )
{
  auto status = std::system( ( std::string( RSB_CLI ) + " " + args + " > /dev/null 2>&1" ).c_str() );
  return WIFEXITED( status ) ? WEXITSTATUS( status ) : -1;
}

} // namespace

TEST( Cli, Sta )
{
  auto ok6 = run( cmd_sta, StaOptions{ data / "c3.circ", 6, std::nullopt } );
  EXPECT_EQ( ok6.code, ok );
  EXPECT_NE( ok6.out.find( "a 2 3 1\n" ), std::string::npos );
  EXPECT_NE( ok6.out.find( "b 5 6 1\n" ), std::string::npos );
  EXPECT_NE( ok6.out.find( "c 4 6 2\n" ), std::string::npos );
  EXPECT_EQ( run( cmd_sta, StaOptions{ data / "c3.circ", 4, std::nullopt } ).code, infeasible );
  EXPECT_EQ( run( cmd_sta, StaOptions{ data / "missing.circ", 6, std::nullopt } ).code, input_error );
}

TEST( Cli, StaWithSlacks )
{
  auto const slacks = scratch( "slacks.json" );
  write_file( slacks, R"({"c": 2})" );
  EXPECT_EQ( run( cmd_sta, StaOptions{ data / "c3.circ", 6, slacks } ).code, ok );
  write_file( slacks, R"({"a": 2})" );
  EXPECT_EQ( run( cmd_sta, StaOptions{ data / "c3.circ", 6, slacks } ).code, infeasible );
  write_file( slacks, R"({"zz": 2})" );
  EXPECT_EQ( run( cmd_sta, StaOptions{ data / "c3.circ", 6, slacks } ).code, input_error );
}

TEST( Cli, Retime )
{
  auto tmin = run( cmd_retime, RetimeOptions{ data / "c3.circ", std::nullopt } );
  EXPECT_EQ( tmin.code, ok );
  EXPECT_EQ( tmin.out.rfind( "Tmin 5\n", 0 ), 0u );
  auto p4 = run( cmd_retime, RetimeOptions{ data / "c3.circ", 4 } );
  EXPECT_EQ( p4.code, infeasible );
  EXPECT_EQ( p4.out, "infeasible\n" );
  EXPECT_EQ( run( cmd_retime, RetimeOptions{ data / "c3.circ", 9 } ).code, ok );
  EXPECT_EQ( run( cmd_retime, RetimeOptions{ data / "s27_like.circ", std::nullopt } ).out.rfind( "Tmin 20\n", 0 ), 0u );
}

TEST( Cli, Budget )
{
  auto const json = scratch( "result.json" );
  BudgetCommandOptions o{ data / "c3.circ", data / "pc4.json", std::nullopt, true, json };
  auto r = run( cmd_budget, o );
  EXPECT_EQ( r.code, ok ) << r.out << r.err;
  EXPECT_NE( r.out.find( "check passed" ), std::string::npos );
  auto const doc = nlohmann::json::parse( read_file( json ) );
  EXPECT_EQ( doc.at( "period" ).get<Time>(), 5 );
  EXPECT_EQ( doc.at( "gates" ).size(), 3u );

  auto const c = test::load_circuit( "c3.circ" );
  auto const best = oracle::brute_force( c, 5, std::vector<PowerSlackCurve>( 3, default_curve() ) );
  EXPECT_GE( doc.at( "total_power" ).get<std::int64_t>(), best->power );

  o.period = 4;
  EXPECT_EQ( run( cmd_budget, o ).code, infeasible );
  o.period = std::nullopt;
  o.curves = data / "missing.json";
  EXPECT_EQ( run( cmd_budget, o ).code, input_error );
}

TEST( Cli, BenchEmptyAndDeterministic )
{
  BenchOptions o;
  o.gen = 0;
  EXPECT_EQ( run( cmd_bench, o ).out, bench_header + "\n" );

  o.gen = 6;
  o.seed = 1;
  o.deterministic = true;
  auto a = run( cmd_bench, o );
  auto b = run( cmd_bench, o );
  EXPECT_EQ( a.code, ok );
  EXPECT_EQ( a.out, b.out );
  std::istringstream lines( a.out );
  int count = 0;
  for ( std::string l; std::getline( lines, l ); )
    ++count;
  EXPECT_EQ( count, 1 + 6 + 2 );
  EXPECT_NE( a.out.find( "\nAvg," ), std::string::npos );
  EXPECT_NE( a.out.find( "\nDiff," ), std::string::npos );
}

TEST( Cli, BenchDirectory )
{
  BenchOptions o;
  o.dir = data;
  o.deterministic = true;
  auto r = run( cmd_bench, o );
  EXPECT_EQ( r.code, ok ) << r.err;
  EXPECT_NE( r.out.find( "\nc3,3,3,5," ), std::string::npos );
  EXPECT_NE( r.out.find( "\ns27_like,11,19,20," ), std::string::npos );
}

TEST( Cli, DimacsAndMcf )
{
  auto const net = scratch( "c3.dimacs" );
  auto d = run( cmd_dimacs, DimacsOptions{ data / "c3.circ", data / "pc4.json", std::nullopt } );
  EXPECT_EQ( d.code, ok );
  write_file( net, d.out );
  auto m = run( cmd_mcf, McfOptions{ net, true } );
  EXPECT_EQ( m.code, ok ) << m.err;
  EXPECT_NE( m.out.find( "check passed" ), std::string::npos );

  write_file( net, "p min 2 1\na 1 2 1 3 -5\n" );
  EXPECT_EQ( run( cmd_mcf, McfOptions{ net, false } ).code, input_error );
}

TEST( Cli, BinaryExitCodes )
{
  auto const c3 = ( data / "c3.circ" ).string();
  EXPECT_EQ( binary_exit( "sta " + c3 + " --period 6" ), 0 );
  EXPECT_EQ( binary_exit( "sta " + c3 + " --period 4" ), 2 );
  EXPECT_EQ( binary_exit( "sta /nonexistent.circ --period 6" ), 1 );
  EXPECT_EQ( binary_exit( "retime " + c3 + " --period 4" ), 2 );
  EXPECT_EQ( binary_exit( "budget " + c3 + " " + ( data / "pc4.json" ).string() + " --check" ), 0 );
  EXPECT_EQ( binary_exit( "frobnicate" ), 1 );
  EXPECT_EQ( binary_exit( "bench" ), 1 );
}
