"""Graph anonymization by budgeted edge deletion."""
