"""
Paquete de servicios de cálculo.
Contiene el modelo de cristal, las fórmulas cerradas, los oráculos y los experimentos.
"""
