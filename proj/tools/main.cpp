#include <iostream>

int main() {
  std::cout << "simfsvgd CLI placeholder\n";
  return 0;
}
