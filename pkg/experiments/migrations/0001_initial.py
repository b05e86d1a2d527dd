# Generated by Django 5.2.11 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRunModel',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(help_text='Management command that produced this run.', max_length=32)),
                ('seed', models.IntegerField(default=0, help_text='Seed of the run.')),
                ('output_dir', models.CharField(help_text="Directory holding the run's artifacts.", max_length=500)),
                ('config', models.JSONField(default=dict, help_text='Resolved run configuration, as written to resolved_config.json.')),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('COMPLETED', 'Completed'), ('FAILED', 'Failed')], default='RUNNING', max_length=16)),
                ('summary', models.JSONField(default=dict, help_text='Command-specific results, e.g. episode counts or metrics.')),
                ('error_message', models.TextField(blank=True, default='')),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='EpochMetricModel',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('epoch', models.PositiveIntegerField()),
                ('split', models.CharField(max_length=16)),
                ('nll', models.FloatField(blank=True, null=True)),
                ('accuracy', models.FloatField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='epoch_metrics', to='experiments.experimentrunmodel')),
            ],
            options={
                'verbose_name': 'Epoch Metric',
                'verbose_name_plural': 'Epoch Metrics',
                'ordering': ['run', 'epoch', 'split'],
                'unique_together': {('run', 'epoch', 'split')},
            },
        ),
    ]
