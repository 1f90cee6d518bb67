#pragma once

/*!
  \file retiming.hpp
  \brief Retiming legality, application, period feasibility and minimum period.

  A retiming r moves r_i FFs from the outputs of gate i to its inputs; edge
  (i, j) then carries w_ij + r_j - r_i FFs. Feasibility for a target period
  is decided by label correction on the Leiserson-Saxe difference
  constraints: every gate whose arrival exceeds the period gets its label
  raised, for at most |V| rounds.
*/

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"

namespace rsb
{

struct Retiming
{
  std::vector<std::int64_t> r;

  bool operator==( Retiming const& ) const = default;
};

inline Retiming zero_retiming( Circuit const& c )
{
  return Retiming{ std::vector<std::int64_t>( c.num_gates(), 0 ) };
}

inline std::vector<std::int64_t> retimed_weights( Circuit const& c, Retiming const& r )
{
  std::vector<std::int64_t> w( c.num_edges() );
  for ( auto e = 0; e < c.num_edges(); ++e )
  {
    auto const& ed = c.edge( e );
    w[e] = ed.ff + r.r[ed.dst] - r.r[ed.src];
  }
  return w;
}

inline bool is_legal( Circuit const& c, Retiming const& r )
{
  if ( static_cast<int>( r.r.size() ) != c.num_gates() )
    return false;
  auto w = retimed_weights( c, r );
  return std::all_of( w.begin(), w.end(), []( auto x ) { return x >= 0; } );
}

/*! \brief Shifts labels so that the smallest is zero. */
inline Retiming normalized( Retiming r )
{
  if ( !r.r.empty() )
  {
    auto lo = *std::min_element( r.r.begin(), r.r.end() );
    for ( auto& x : r.r )
      x -= lo;
  }
  return r;
}

inline Circuit apply_retiming( Circuit const& c, Retiming const& r )
{
  if ( static_cast<int>( r.r.size() ) != c.num_gates() )
    throw std::invalid_argument( "apply_retiming: label count does not match gate count" );
  if ( !is_legal( c, r ) )
    throw std::invalid_argument( "apply_retiming: illegal retiming (negative FF count)" );
  return with_ff_counts( c, retimed_weights( c, r ) );
}

namespace detail
{

/* arrival times on the retimed graph without materializing a Circuit */
class RetimedTimer
{
public:
  RetimedTimer( Circuit const& c, std::vector<Time> const& eff ) : c_( c ), eff_( eff ), arrival_( c.num_gates() ) {}

  std::vector<Time> const& arrivals( Retiming const& r )
  {
    auto w = retimed_weights( c_, r );
    auto order = c_.zero_ff_topological_order( w );
    if ( !order )
      throw std::logic_error( "retiming produced a zero-FF cycle" );
    for ( auto i : *order )
    {
      Time a = 0;
      for ( auto e : c_.fanin( i ) )
        if ( w[e] == 0 )
          a = std::max( a, arrival_[c_.edge( e ).src] );
      arrival_[i] = a + eff_[i];
    }
    return arrival_;
  }

private:
  Circuit const& c_;
  std::vector<Time> const& eff_;
  std::vector<Time> arrival_;
};

} // namespace detail

/*! \brief Outcome of a retiming search; `r` is the last labelling tried even when infeasible. */
struct RetimingAttempt
{
  bool feasible{ false };
  Retiming r;
};

/*! \brief Searches for a legal retiming meeting `period` with effective delays `eff`.
 *
 * The returned labelling is normalized (min label 0). When infeasible it
 * is the final labelling of the search and is still legal, which makes it
 * useful for locating the violating gates.
 */
inline RetimingAttempt retime_for_period( Circuit const& c, Time period, std::vector<Time> const& eff )
{
  auto const n = c.num_gates();
  RetimingAttempt out{ false, zero_retiming( c ) };
  if ( *std::max_element( eff.begin(), eff.end() ) > period )
    return out;

  detail::RetimedTimer timer( c, eff );
  for ( auto round = 0; round < n; ++round )
  {
    auto const& a = timer.arrivals( out.r );
    bool violated = false;
    for ( auto i = 0; i < n; ++i )
    {
      if ( a[i] > period )
      {
        ++out.r.r[i];
        violated = true;
      }
    }
    if ( !violated )
    {
      out.feasible = true;
      break;
    }
  }
  if ( !out.feasible )
  {
    auto const& a = timer.arrivals( out.r );
    out.feasible = *std::max_element( a.begin(), a.end() ) <= period;
  }
  out.r = normalized( std::move( out.r ) );
  return out;
}

inline std::optional<Retiming> feasible_retiming( Circuit const& c, Time period, std::vector<Time> const& eff )
{
  auto attempt = retime_for_period( c, period, eff );
  if ( !attempt.feasible )
    return std::nullopt;
  return std::move( attempt.r );
}

struct MinPeriodResult
{
  Time period{ 0 };
  Retiming retiming;
};

/*! \brief Smallest period reachable by retiming, by binary search over [max eff, sum eff]. */
inline MinPeriodResult min_period( Circuit const& c, std::vector<Time> const& eff )
{
  Time lo = *std::max_element( eff.begin(), eff.end() );
  Time hi = std::max( lo, std::accumulate( eff.begin(), eff.end(), Time{ 0 } ) );
  auto best = feasible_retiming( c, hi, eff );
  if ( !best )
    throw std::logic_error( "min_period: total delay is not a feasible period" );
  while ( lo < hi )
  {
    auto mid = lo + ( hi - lo ) / 2;
    if ( auto r = feasible_retiming( c, mid, eff ) )
    {
      hi = mid;
      best = std::move( r );
    }
    else
    {
      lo = mid + 1;
    }
  }
  return { hi, std::move( *best ) };
}

inline MinPeriodResult min_period( Circuit const& c )
{
  return min_period( c, c.delays() );
}

} // namespace rsb
