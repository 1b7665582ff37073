def factorial(n):
