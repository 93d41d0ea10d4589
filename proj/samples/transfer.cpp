// Runs the transfer loop through the railway circuit and through the plain
// interpreter, then prints both results.

#include <iostream>
#include <sstream>

#include "hca/railway.hpp"

int main() {
    using namespace hca::railway;
    std::istringstream src(
        "loop: DEC r0 -> move | Z:done\n"
        "move: INC r1 -> loop\n"
        "done: HALT\n");
    MachineProgram p = parse_program(src);
    std::cout << format_program(p);

    MachineResult r = run_machine(p, 3, 4);
    InterpreterResult d = interpret(p, 3, 4, 1000);
    std::cout << "circuit:     " << r.verdict << " r0=" << r.r0 << " r1=" << r.r1 << " after " << r.instructions
              << " instructions, " << r.events << " events\n";
    std::cout << "interpreter: " << (d.halted ? "halted" : "running") << " r0=" << d.r0 << " r1=" << d.r1 << "\n";
    for (auto& q : r.problems) std::cout << "problem: " << q << "\n";
    return r.r0 == d.r0 && r.r1 == d.r1 && r.problems.empty() ? 0 : 1;
}
