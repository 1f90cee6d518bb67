#pragma once

/*!
  \file power.hpp
  \brief Discrete power-slack curves.

  Each gate offers L slack levels s^1 < ... < s^L with integer powers.
  Neighbouring points are joined by linear segments; the curve must be
  convex and nonincreasing. Segment slopes are carried as exact rationals.
*/

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include "circuit.hpp"

namespace rsb
{

using Rational = boost::rational<std::int64_t>;

struct Level
{
  Time slack{ 0 };
  std::int64_t power{ 0 };

  bool operator==( Level const& ) const = default;
};

struct PowerSlackCurve
{
  std::vector<Level> levels;

  std::size_t size() const { return levels.size(); }
  Level const& front() const { return levels.front(); }
  Level const& back() const { return levels.back(); }

  bool operator==( PowerSlackCurve const& ) const = default;
};

/*! \brief Slope magnitudes b(2..L) of the curve segments. Empty when L < 2. */
inline std::vector<Rational> breakpoints( PowerSlackCurve const& curve )
{
  std::vector<Rational> b;
  for ( auto q = 1u; q < curve.levels.size(); ++q )
  {
    auto const& lo = curve.levels[q - 1];
    auto const& hi = curve.levels[q];
    b.emplace_back( lo.power - hi.power, hi.slack - lo.slack );
  }
  return b;
}

/*! \brief Reason the curve is invalid, or nullopt if it is a convex nonincreasing curve. */
inline std::optional<std::string> curve_error( PowerSlackCurve const& curve )
{
  auto const& lv = curve.levels;
  if ( lv.empty() )
    return "empty curve";
  if ( lv.front().slack < 0 )
    return "negative slack level";
  for ( auto q = 1u; q < lv.size(); ++q )
  {
    if ( lv[q].slack <= lv[q - 1].slack )
      return "non-monotone slack levels";
    if ( lv[q].power > lv[q - 1].power )
      return "increasing power";
  }
  auto b = breakpoints( curve );
  for ( auto q = 1u; q < b.size(); ++q )
    if ( b[q] > b[q - 1] )
      return "non-convex curve";
  return std::nullopt;
}

inline void validate_curve( PowerSlackCurve const& curve )
{
  if ( auto err = curve_error( curve ) )
    throw InputError( "invalid power-slack curve: " + *err );
}

/*! \brief Piecewise-linear interpolation of the curve at `slack` (must lie in [s^1, s^L]). */
inline Rational eval_power( PowerSlackCurve const& curve, Rational const& slack )
{
  auto const& lv = curve.levels;
  if ( lv.empty() || slack < lv.front().slack || slack > lv.back().slack )
    throw std::out_of_range( "eval_power: slack outside curve range" );
  for ( auto q = 1u; q < lv.size(); ++q )
  {
    if ( slack <= lv[q].slack )
    {
      Rational const gap = lv[q].slack - lv[q - 1].slack;
      return Rational( lv[q - 1].power ) + ( slack - lv[q - 1].slack ) * Rational( lv[q].power - lv[q - 1].power ) / gap;
    }
  }
  return Rational( lv.front().power );
}

inline Rational eval_power( PowerSlackCurve const& curve, Time slack )
{
  return eval_power( curve, Rational( slack ) );
}

/*! \brief Curve with the cost held flat from its minimum-power slack onward.
 *
 * `s_star` is the smallest slack reaching the minimum power. The value is
 * P(s) for s <= s_star and P(s_star) beyond it, so eval(y) equals the best
 * power available with any slack not exceeding y. On a valid curve the
 * tabulated levels are unchanged.
 */
struct QCurve
{
  PowerSlackCurve curve;
  Time s_star{ 0 };

  Rational eval( Rational const& slack ) const
  {
    if ( slack < curve.front().slack )
      throw std::out_of_range( "QCurve::eval: slack below first level" );
    return eval_power( curve, slack < Rational( s_star ) ? slack : Rational( s_star ) );
  }
  Rational eval( Time slack ) const { return eval( Rational( slack ) ); }

  bool operator==( QCurve const& ) const = default;
};

inline QCurve q_transform( PowerSlackCurve const& curve )
{
  validate_curve( curve );
  QCurve q{ curve, curve.front().slack };
  auto best = curve.front().power;
  for ( auto const& l : curve.levels )
  {
    if ( l.power < best )
    {
      best = l.power;
      q.s_star = l.slack;
    }
  }
  for ( auto& l : q.curve.levels )
    if ( l.slack > q.s_star )
      l.power = best;
  return q;
}

/*! \brief Divisor for the arrival-edge penalty of gate `j`: its zero-FF fanin count, at least 1. */
inline std::int64_t penalty_divisor( Circuit const& c, int j )
{
  std::int64_t k = 0;
  for ( auto e : c.fanin( j ) )
    if ( c.edge( e ).ff == 0 )
      ++k;
  return std::max<std::int64_t>( k, 1 );
}

/* curve files */

inline PowerSlackCurve curve_from_json( nlohmann::json const& j )
{
  if ( !j.is_array() )
    throw InputError( "curve must be an array of [slack, power] pairs" );
  PowerSlackCurve curve;
  for ( auto const& pt : j )
  {
    if ( !pt.is_array() || pt.size() != 2 || !pt[0].is_number_integer() || !pt[1].is_number_integer() )
      throw InputError( "curve point must be an integer pair [slack, power]" );
    curve.levels.push_back( { pt[0].get<Time>(), pt[1].get<std::int64_t>() } );
  }
  validate_curve( curve );
  return curve;
}

inline nlohmann::json curve_to_json( PowerSlackCurve const& curve )
{
  auto arr = nlohmann::json::array();
  for ( auto const& l : curve.levels )
    arr.push_back( { l.slack, l.power } );
  return arr;
}

/*! \brief Named curves plus an optional fallback for gates without an entry. */
struct CurveLibrary
{
  std::map<std::string, PowerSlackCurve> named;
  std::optional<PowerSlackCurve> fallback;

  /*! \brief Curve per gate of `c`, in gate order. */
  std::vector<PowerSlackCurve> resolve( Circuit const& c ) const
  {
    for ( auto const& [name, curve] : named )
      if ( !c.find_gate( name ) )
        throw InputError( "curve given for unknown gate '" + name + "'" );
    std::vector<PowerSlackCurve> out;
    out.reserve( c.num_gates() );
    for ( auto const& g : c.gates() )
    {
      if ( auto it = named.find( g.name ); it != named.end() )
        out.push_back( it->second );
      else if ( fallback )
        out.push_back( *fallback );
      else
        throw InputError( "no power curve for gate '" + g.name + "' and no \"default\" entry" );
    }
    return out;
  }
};

inline CurveLibrary parse_curves( std::string const& text )
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw InputError( std::string( "curve file: " ) + e.what() );
  }
  if ( !doc.is_object() )
    throw InputError( "curve file must be a JSON object" );
  CurveLibrary lib;
  for ( auto const& [key, value] : doc.items() )
  {
    auto curve = curve_from_json( value );
    if ( key == "default" )
      lib.fallback = std::move( curve );
    else
      lib.named.emplace( key, std::move( curve ) );
  }
  return lib;
}

inline std::string render_curves( CurveLibrary const& lib )
{
  nlohmann::json doc = nlohmann::json::object();
  if ( lib.fallback )
    doc["default"] = curve_to_json( *lib.fallback );
  for ( auto const& [name, curve] : lib.named )
    doc[name] = curve_to_json( curve );
  return doc.dump( 2 ) + "\n";
}

} // namespace rsb
