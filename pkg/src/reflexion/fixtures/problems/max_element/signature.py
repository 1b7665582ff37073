def max_element(values):
