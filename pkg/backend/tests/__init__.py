# Testes do HelpCap
