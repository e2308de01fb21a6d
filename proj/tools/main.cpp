#include <iostream>

#include "leafnet/model.hpp"

int main() {
  std::cout << "leafnet\n";
  return 0;
}
