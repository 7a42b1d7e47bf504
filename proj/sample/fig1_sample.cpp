// Builds the two-person example graph from sample/fig1.csv (or a path given
// on the command line) and prints the canonical JSON and DOT forms.

#include <iostream>

#include "shelterflow.hpp"

int main(int argc, char** argv) {
  using namespace shelterflow;
  const std::string path = argc > 1 ? argv[1] : SHELTERFLOW_SAMPLE_DIR "/fig1.csv";
  try {
    RunConfig cfg;
    const Analysis a = analyze_text(read_input_file(path), cfg);
    const FlowGraph g = build_flow_graph(a.corpus, a.sequences, full_window(a.corpus));
    std::cout << to_json(g).dump(2) << "\n\n" << emit_dot(g);
    for (const auto& seq : a.sequences)
      std::cout << seq.person_id << ": " << extract_transitions(seq).size() << " transitions, "
                << seq.interactions() << " interactions\n";
  } catch (const Error& e) {
    std::cerr << e.kind_name() << ": " << e.what() << '\n';
    return e.exit_code();
  }
}
