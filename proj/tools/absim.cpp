#include <iostream>
int main() { std::cout << "absim placeholder\n"; }
