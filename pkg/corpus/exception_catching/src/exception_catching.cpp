#include <iostream>
#include <stdexcept>

double divideNumbers(double numerator, double denominator) {
    if (denominator == 0) {
        throw std::runtime_error("Division by zero error");
    }
    return numerator / denominator;
}

int main() {
    double num = 10.0, denom = 0.0;
    try {
        double result = divideNumbers(num, denom);
        std::cout << "Result is " << result << std::endl;
        return 1;  // the throw must happen
    } catch (const std::runtime_error& e) {
        std::cout << "Caught an exception: " << e.what() << std::endl;
    }
    return 0;
}
