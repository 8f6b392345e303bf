# Classifiers package
