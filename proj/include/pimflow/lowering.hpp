#pragma once

#include <pimflow/isa.hpp>
#include <pimflow/netlist.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimflow
{

/*! \brief Body netlist implementing `source_instruction` with gates from `target_set`.
 *
 * The body's primary inputs/outputs are the formal pins of the instruction, in pin order.
 */
struct expansion_template
{
  std::string source_instruction;
  std::string target_set;
  netlist body;
};

/*! \brief Verified expansion templates keyed by (instruction, target set name).
 *
 * Lookup for an arbitrary target set picks, among the registered templates
 * whose gates all exist in the target, the one with the fewest gates.
 */
class template_registry
{
public:
  /*! \brief Built-in templates into TS0 ({NOT, NOR2}) and into the TS1 machine primitives ({NOT, AND2, OR2}). */
  static template_registry const& builtin();

  /*! \brief Registers a template after an exhaustive equivalence check against `source`. */
  void add( instruction const& source, expansion_template tmpl );

  /*! \brief Parses a template file: netlist text plus a `.template <INSTR> <SET>` header line. */
  void add_from_text( std::string_view text, instruction_set const& library );

  std::vector<expansion_template> const* find_registered( std::string const& instruction ) const;

private:
  std::map<std::string, std::vector<expansion_template>> templates_;
};

/*! \brief Template for `instr` over `target`.
 *
 * Returns a one-gate body when `target` already holds the instruction. Otherwise
 * uses the smallest registered template whose gates all live in `target`, and as a
 * last resort re-expresses the TS0 template through whatever NOR/NOT/NAND/AND/OR
 * gates `target` provides. Throws `no_expansion_path_error` if nothing applies.
 */
expansion_template find_expansion_template( instruction const& instr, instruction_set const& target,
                                            template_registry const& registry = template_registry::builtin() );

struct equivalence_result
{
  bool equivalent{ true };
  /*! false when random simulation was used (more than 16 inputs) */
  bool exhaustive{ true };
  /*! first failing vector in the input order of the first netlist */
  std::optional<bit_vector> counterexample;
};

/*! \brief Exhaustive up to 16 inputs, otherwise 10,000 seeded random vectors. */
equivalence_result check_equivalence( netlist const& a, netlist const& b );

struct lowering_options
{
  bool fusion{ true };
};

/*! \brief Rewrites `ntk` into a functionally equivalent netlist over `isa`.
 *
 * Runs fusion to a fixed point, expands every gate outside `isa` through its
 * template, then fuses again. Fusion greedily applies the rewrite with the largest
 * gate saving (ties: instruction name, then textual order) and skips any rewrite
 * that would create a gate-level cycle between multi-output gates.
 */
netlist lower_to_isa( netlist const& ntk, instruction_set const& isa,
                      template_registry const& registry = template_registry::builtin(),
                      lowering_options const& options = {} );

/*! \brief Only the fusion stage; every gate of `ntk` must already be in `isa`. */
netlist fuse_to_fixed_point( netlist const& ntk, instruction_set const& isa );

} // namespace pimflow
