#ifndef GRAPHPARSE_TOOLS_CLI_HPP_
#define GRAPHPARSE_TOOLS_CLI_HPP_

namespace graphparse::cli {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.
int run(int argc, char** argv);

}  // namespace graphparse::cli

#endif  // GRAPHPARSE_TOOLS_CLI_HPP_
