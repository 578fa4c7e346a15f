#include "fsislip/cli.hpp"

int main(int argc, char** argv)
{
  return fsislip::run_cli(argc, argv);
}
