#ifndef KAM_JET_IO_HPP
#define KAM_JET_IO_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

#include <kam/jet.hpp>

namespace kam {

// Text format:
//   # jet vars=4 trunc=8 blocks=q:2,p:2 [weights=1,1,1,1]
//   2,0,1,0:3/4
// One term per line in graded order; complex coefficients are written "re im".
template <class C>
std::string to_text(const Jet<C> &f);

template <class C>
Jet<C> jet_from_text(const std::string &text);

// Reads only the header; used to pick a coefficient type or validate a file.
ShapePtr shape_from_text(const std::string &text);

template <class C>
nlohmann::json to_json(const Jet<C> &f);

template <class C>
Jet<C> jet_from_json(const nlohmann::json &j);

nlohmann::json shape_to_json(const JetShape &shape);
ShapePtr shape_from_json(const nlohmann::json &j);

} // namespace kam

#endif
