#pragma once

#include <pimflow/isa.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimflow
{

using bit_vector = std::vector<bool>;

struct gate_instance
{
  std::string instruction;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  bool operator==( gate_instance const& ) const = default;
};

/*! \brief Gate-level combinational netlist.
 *
 * The netlist carries the definitions of every instruction it references, so
 * evaluation and rewriting never need the originating library. Gates may be
 * listed in any order; forward references are resolved at validation.
 */
class netlist
{
public:
  netlist() = default;
  explicit netlist( std::string model ) : model_( std::move( model ) ) {}

  std::string const& model() const noexcept { return model_; }
  std::vector<std::string> const& inputs() const noexcept { return inputs_; }
  std::vector<std::string> const& outputs() const noexcept { return outputs_; }
  std::vector<gate_instance> const& gates() const noexcept { return gates_; }
  std::map<std::string, instruction> const& cells() const noexcept { return cells_; }

  instruction const& cell( std::string const& name ) const;

  void set_model( std::string model ) { model_ = std::move( model ); }
  void add_input( std::string name ) { inputs_.push_back( std::move( name ) ); }
  void add_output( std::string name ) { outputs_.push_back( std::move( name ) ); }
  /*! \brief Appends a gate and registers the instruction definition; returns the gate index. */
  std::size_t add_gate( instruction const& instr, std::vector<std::string> inputs, std::vector<std::string> outputs );

  /*! \brief Display name of gate `i`, used in diagnostics. */
  static std::string gate_name( std::size_t i ) { return "g" + std::to_string( i ); }

  bool operator==( netlist const& other ) const = default;

private:
  std::string model_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<gate_instance> gates_;
  std::map<std::string, instruction> cells_;
};

/*! \brief Index-based view of a valid netlist used by evaluators and the mapper.
 *
 * `order` lists (gate, output) pairs in a signal-level topological order that
 * only follows true functional dependencies, so it exists even when the
 * gate-level graph contains a multi-output cycle.
 */
struct indexed_netlist
{
  struct gate
  {
    instruction const* instr;
    std::vector<std::uint32_t> inputs;
    std::vector<std::uint32_t> outputs;
  };

  std::vector<std::string> signal_names;
  std::vector<std::uint32_t> inputs;
  std::vector<std::uint32_t> outputs;
  std::vector<gate> gates;
  std::vector<std::int64_t> driver_gate;
  std::vector<std::uint32_t> driver_output;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
};

/*! \brief Validates structure; throws `netlist_error` on arity, driver, or loop violations. */
indexed_netlist index_netlist( netlist const& ntk );

/*! \brief Parses the `.model/.inputs/.outputs/.gate/.end` text format against a library. */
netlist parse_netlist( std::string_view text, instruction_set const& library );
netlist load_netlist( std::filesystem::path const& path, instruction_set const& library );
std::string write_netlist( netlist const& ntk );

/*! \brief The mapping DAG: one leaf per primary input, one node per gate. */
struct mapping_graph
{
  struct child_ref
  {
    std::uint32_t node;
    std::uint32_t output;
  };

  struct node
  {
    bool is_leaf{ false };
    std::string name;
    std::string instruction;
    std::uint32_t num_outputs{ 1u };
    /*! one entry per input pin, in pin order */
    std::vector<child_ref> children;
    /*! per output: consuming gate pins plus one per primary-output listing */
    std::vector<std::uint32_t> output_fanout;
    std::vector<std::string> output_signals;
    std::uint32_t fo{ 0u };
  };

  std::vector<node> nodes;
  std::uint32_t num_inputs{ 0u };
  /*! per primary output: (name, driving node/output) */
  std::vector<std::pair<std::string, child_ref>> primary_outputs;

  std::uint32_t gate_node( std::size_t gate_index ) const { return num_inputs + static_cast<std::uint32_t>( gate_index ); }
};

mapping_graph build_dag( netlist const& ntk );

/*! \brief Result of the gate-level cycle check; `gates` is empty when the graph is a DAG. */
struct cycle_report
{
  std::vector<std::string> gates;

  bool ok() const noexcept { return gates.empty(); }
};

/*! \brief Checks the graph in which every (multi-output) gate is a single node. */
cycle_report detect_cycles( netlist const& ntk );

bit_vector evaluate_reference( netlist const& ntk, bit_vector const& inputs );

/*! \brief Bit-parallel evaluation: word `i` of the result holds 64 lanes of primary output `i`. */
std::vector<std::uint64_t> simulate_words( indexed_netlist const& idx, std::vector<std::uint64_t> const& input_words );

} // namespace pimflow
